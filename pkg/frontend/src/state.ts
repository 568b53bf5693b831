// Console state and the pure reducer over server events. The plan payloads
// the server sends are the single source of truth for step cards; step events
// only overlay transient progress (running, attempt counts, error excerpts)
// on top of the most recent plan snapshot. Applying the same event twice, or
// replaying an already-seen sequence number, leaves the state unchanged.

import type {
  ChatMessage,
  ConnectionState,
  PlanView,
  ServerEvent,
  SubtaskView,
} from "./types.js";

export interface StepNote {
  running: boolean;
  attempts: number;
  lastError: string | null;
}

export interface FailureView {
  subtaskId: number;
  errors: string[];
}

export interface ConsoleState {
  sessionId: string | null;
  connection: ConnectionState;
  busy: boolean;
  lastSeq: number;
  plan: PlanView | null;
  notes: Record<number, StepNote>;
  reportJson: string | null;
  reportMethod: string | null;
  resultText: string | null;
  failure: FailureView | null;
  messages: ChatMessage[];
  datasets: string[];
  lastError: string | null;
}

export interface CardView extends SubtaskView {
  running: boolean;
  lastError: string | null;
}

export function initialState(): ConsoleState {
  return {
    sessionId: null,
    connection: "connecting",
    busy: false,
    lastSeq: 0,
    plan: null,
    notes: {},
    reportJson: null,
    reportMethod: null,
    resultText: null,
    failure: null,
    messages: [],
    datasets: [],
    lastError: null,
  };
}

/**
 * Fold one server event into the state.

 * Events with a sequence number at or below the last applied one are
 * ignored, which makes replays and the poll-plus-stream overlap harmless.
 */
export function applyEvent(state: ConsoleState, event: ServerEvent): ConsoleState {
  if (event.seq <= state.lastSeq) {
    return state;
  }
  const next: ConsoleState = { ...state, lastSeq: event.seq };
  switch (event.kind) {
    case "plan": {
      next.plan = event.payload as unknown as PlanView;
      next.notes = {};
      next.reportJson = null;
      next.reportMethod = null;
      next.resultText = null;
      next.failure = null;
      break;
    }
    case "plan_revised": {
      const plan = event.payload as unknown as PlanView;
      next.plan = plan;
      next.notes = pruneNotes(state.notes, plan);
      next.failure = null;
      break;
    }
    case "step_started": {
      const id = payloadId(event);
      next.notes = {
        ...state.notes,
        [id]: { running: true, attempts: 0, lastError: null },
      };
      break;
    }
    case "step_attempt": {
      const id = payloadId(event);
      const prior = state.notes[id];
      const error = event.payload["error"];
      next.notes = {
        ...state.notes,
        [id]: {
          running: true,
          attempts: asNumber(event.payload["attempt"], prior?.attempts ?? 0),
          lastError: typeof error === "string" ? error : null,
        },
      };
      break;
    }
    case "step_finished": {
      const id = payloadId(event);
      const prior = state.notes[id];
      next.notes = {
        ...state.notes,
        [id]: {
          running: false,
          attempts: asNumber(event.payload["attempts"], prior?.attempts ?? 0),
          lastError: prior?.lastError ?? null,
        },
      };
      next.plan = patchSubtask(state.plan, id, {
        status: String(event.payload["status"] ?? ""),
        attempts: asNumber(event.payload["attempts"], 0),
      });
      break;
    }
    case "report": {
      const jsonText = event.payload["json_text"];
      next.reportJson = typeof jsonText === "string" ? jsonText : null;
      const method = event.payload["method"];
      next.reportMethod = typeof method === "string" ? method : null;
      // The artifact bytes belong to the previous report; drop them so the
      // controller refetches the download from the server.
      next.resultText = null;
      next.failure = null;
      break;
    }
    case "failure": {
      const errors = event.payload["errors"];
      next.failure = {
        subtaskId: payloadId(event),
        errors: Array.isArray(errors) ? errors.map(String) : [],
      };
      break;
    }
    default:
      break;
  }
  return next;
}

export function applyEvents(
  state: ConsoleState,
  events: Iterable<ServerEvent>,
): ConsoleState {
  let current = state;
  for (const event of events) {
    current = applyEvent(current, event);
  }
  return current;
}

/**
 * Adopt a plan snapshot the server returned outside the event stream (the
 * message reply or GET /plan). It is newer than any event already applied,
 * and carries fields step events do not, like the selected tool.
 */
export function mergePlan(state: ConsoleState, plan: PlanView): ConsoleState {
  return { ...state, plan, notes: pruneNotes(state.notes, plan) };
}

/** The step cards as rendered: the latest plan snapshot plus progress notes. */
export function stepCards(state: ConsoleState): CardView[] {
  if (state.plan === null) {
    return [];
  }
  return state.plan.subtasks.map((subtask) => {
    const note = state.notes[subtask.id];
    return {
      ...subtask,
      attempts: note !== undefined ? Math.max(note.attempts, subtask.attempts) : subtask.attempts,
      running: note?.running ?? false,
      lastError: noteError(subtask, note, state.failure),
    };
  });
}

function noteError(
  subtask: SubtaskView,
  note: StepNote | undefined,
  failure: FailureView | null,
): string | null {
  if (note?.lastError) {
    return note.lastError;
  }
  if (failure !== null && failure.subtaskId === subtask.id && failure.errors.length > 0) {
    return failure.errors[failure.errors.length - 1];
  }
  return null;
}

function pruneNotes(
  notes: Record<number, StepNote>,
  plan: PlanView,
): Record<number, StepNote> {
  // A revised plan is authoritative: keep progress notes only for steps the
  // revision left settled as failed, so their error excerpts stay visible.
  const kept: Record<number, StepNote> = {};
  for (const subtask of plan.subtasks) {
    const note = notes[subtask.id];
    if (note !== undefined && subtask.status === "failed") {
      kept[subtask.id] = { ...note, running: false };
    }
  }
  return kept;
}

function patchSubtask(
  plan: PlanView | null,
  id: number,
  patch: Partial<SubtaskView>,
): PlanView | null {
  if (plan === null) {
    return null;
  }
  return {
    ...plan,
    subtasks: plan.subtasks.map((s) => (s.id === id ? { ...s, ...patch } : s)),
  };
}

function payloadId(event: ServerEvent): number {
  return asNumber(event.payload["id"], -1);
}

function asNumber(value: unknown, fallback: number): number {
  return typeof value === "number" && Number.isFinite(value) ? value : fallback;
}
