// Wire shapes for the analysis service. These mirror the JSON the server
// sends; the console never invents fields of its own on top of them.

export interface SubtaskView {
  id: number;
  description: string;
  action: string;
  econometric_tag: string | null;
  depends_on: number[];
  status: string;
  selected_tool: string | null;
  attempts: number;
}

export interface PlanView {
  template_name: string;
  created_from: string;
  subtasks: SubtaskView[];
  notes: string[];
}

export interface ServerEvent {
  seq: number;
  kind: string;
  payload: Record<string, unknown>;
}

export interface MessageReply {
  accepted: boolean;
  plan: PlanView | null;
  result?:
    | { kind: "report"; json_text: string }
    | { kind: "failure"; subtask_id: number; errors: string[] };
}

export interface ToolDescriptorView {
  name: string;
  version: string;
  summary: Record<string, string>;
}

export type ConnectionState = "connecting" | "ok" | "down";

export interface ChatMessage {
  role: "user" | "service";
  text: string;
}
