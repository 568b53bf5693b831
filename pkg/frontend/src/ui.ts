// Console controller and DOM binder. The controller owns the state machine
// (session lifecycle, message round trips, event application, result
// fetching) and is DOM-free so it can be exercised headlessly; mountConsole
// wires it to a document.

import { ApiClient, ApiError } from "./api.js";
import {
  renderApp,
  renderBanner,
  renderDatasets,
  renderMessages,
  renderResult,
  renderStepCards,
} from "./render.js";
import { applyEvent, initialState, mergePlan, type ConsoleState } from "./state.js";

export interface ViewSink {
  render(state: ConsoleState): void;
}

export interface ControllerOptions {
  /** Keep a live event-stream subscription open (one per session). */
  stream?: boolean;
}

export class ConsoleController {
  state: ConsoleState;
  private streamAbort: AbortController | null = null;
  private resultFetch: Promise<void> | null = null;

  constructor(
    private readonly api: ApiClient,
    private readonly sink: ViewSink,
    private readonly options: ControllerOptions = {},
  ) {
    this.state = initialState();
  }

  private commit(next: ConsoleState): void {
    this.state = next;
    this.sink.render(next);
  }

  private update(patch: Partial<ConsoleState>): void {
    this.commit({ ...this.state, ...patch });
  }

  /** Create a fresh session. Resolves with connection state; never throws. */
  async start(): Promise<void> {
    this.stop();
    this.update({ ...initialState(), connection: "connecting" });
    try {
      const sessionId = await this.api.createSession();
      this.update({ sessionId, connection: "ok", lastError: null });
      this.openStream();
    } catch (error) {
      this.update({ connection: "down", lastError: messageOf(error) });
    }
  }

  /** Attach to an existing session id (from the URL fragment). */
  async resume(sessionId: string): Promise<void> {
    this.stop();
    this.update({ ...initialState(), connection: "connecting" });
    try {
      const events = await this.api.getEvents(sessionId, 0);
      this.update({ sessionId, connection: "ok", lastError: null });
      for (const event of events) {
        this.commit(applyEvent(this.state, event));
      }
      const plan = await this.api.getPlan(sessionId);
      if (plan !== null) {
        this.commit(mergePlan(this.state, plan));
      }
      await this.ensureResult();
      this.openStream();
    } catch (error) {
      if (error instanceof ApiError && error.status === 404) {
        await this.start();
        return;
      }
      this.update({ connection: "down", lastError: messageOf(error) });
    }
  }

  async retry(): Promise<void> {
    await this.start();
  }

  /** Send one user message and fold every resulting event into the state. */
  async send(text: string): Promise<boolean> {
    const trimmed = text.trim();
    if (this.state.sessionId === null || this.state.busy || trimmed === "") {
      return false;
    }
    const sessionId = this.state.sessionId;
    this.update({
      busy: true,
      lastError: null,
      messages: [...this.state.messages, { role: "user" as const, text: trimmed }],
    });
    try {
      const reply = await this.api.sendMessage(sessionId, trimmed);
      // Catch up on everything the run emitted; the live stream may already
      // have applied some of these, which the reducer ignores by seq.
      const events = await this.api.getEvents(sessionId, this.state.lastSeq);
      for (const event of events) {
        this.commit(applyEvent(this.state, event));
      }
      if (reply.plan !== null) {
        // The reply carries the settled plan, including per-step fields the
        // events do not (selected tool); adopt it as the final snapshot.
        this.commit(mergePlan(this.state, reply.plan));
      }
      await this.ensureResult();
      this.update({
        messages: [...this.state.messages, { role: "service", text: replySummary(reply) }],
      });
      return true;
    } catch (error) {
      this.update({ lastError: messageOf(error) });
      return false;
    } finally {
      this.update({ busy: false });
    }
  }

  /** Upload a dataset; rejections surface verbatim in the banner. */
  async upload(content: Blob, filename: string): Promise<string | null> {
    if (this.state.busy) {
      return null;
    }
    this.update({ busy: true, lastError: null });
    try {
      const name = await this.api.uploadDataset(content, filename);
      if (!this.state.datasets.includes(name)) {
        this.update({ datasets: [...this.state.datasets, name] });
      }
      return name;
    } catch (error) {
      this.update({ lastError: messageOf(error) });
      return null;
    } finally {
      this.update({ busy: false });
    }
  }

  /** Close the event-stream subscription. */
  stop(): void {
    if (this.streamAbort !== null) {
      this.streamAbort.abort();
      this.streamAbort = null;
    }
  }

  private openStream(): void {
    if (this.options.stream !== true || this.state.sessionId === null) {
      return;
    }
    this.stop();
    const abort = new AbortController();
    this.streamAbort = abort;
    this.api
      .streamEvents(
        this.state.sessionId,
        this.state.lastSeq,
        (event) => {
          this.commit(applyEvent(this.state, event));
          if (event.kind === "report") {
            void this.ensureResult();
          }
        },
        abort.signal,
      )
      .catch((error: unknown) => {
        if (!abort.signal.aborted) {
          this.update({ connection: "down", lastError: messageOf(error) });
        }
      });
  }

  /** Fetch the result artifact bytes if a report exists and they are stale. */
  private ensureResult(): Promise<void> {
    const { sessionId, reportJson, resultText } = this.state;
    if (sessionId === null || reportJson === null || resultText !== null) {
      return Promise.resolve();
    }
    if (this.resultFetch === null) {
      this.resultFetch = this.api
        .getResultText(sessionId)
        .then((text) => {
          if (this.state.resultText === null) {
            this.update({ resultText: text });
          }
        })
        .catch(() => {
          // Result not stored yet; the next report event retries.
        })
        .finally(() => {
          this.resultFetch = null;
        });
    }
    return this.resultFetch;
  }
}

function replySummary(reply: {
  accepted: boolean;
  result?: { kind: string; [key: string]: unknown };
}): string {
  if (reply.result?.kind === "report") {
    return "analysis complete; result table updated";
  }
  if (reply.result?.kind === "failure") {
    return `analysis failed at step ${String(reply.result["subtask_id"])}`;
  }
  return reply.accepted ? "request accepted" : "request rejected";
}

function messageOf(error: unknown): string {
  if (error instanceof ApiError) {
    return error.detail;
  }
  return error instanceof Error ? error.message : String(error);
}

// ---------------------------------------------------------------------------
// DOM binding
// ---------------------------------------------------------------------------

export function mountConsole(root: HTMLElement, api: ApiClient): ConsoleController {
  let downloadUrl: string | null = null;

  const sink: ViewSink = {
    render(state: ConsoleState): void {
      const region = (name: string): HTMLElement | null =>
        root.querySelector(`[data-region="${name}"]`);
      const banner = region("banner");
      if (banner !== null) {
        banner.innerHTML = renderBanner(state);
      }
      const messages = region("messages");
      if (messages !== null) {
        messages.innerHTML = renderMessages(state);
      }
      const plan = region("plan");
      if (plan !== null) {
        plan.innerHTML = renderStepCards(state);
      }
      const result = region("result");
      if (result !== null) {
        result.innerHTML = renderResult(state);
        const anchor = result.querySelector<HTMLAnchorElement>("[data-download]");
        if (anchor !== null && state.resultText !== null) {
          if (downloadUrl !== null) {
            URL.revokeObjectURL(downloadUrl);
          }
          downloadUrl = URL.createObjectURL(
            new Blob([state.resultText], { type: "application/json" }),
          );
          anchor.href = downloadUrl;
        }
      }
      const datasets = region("datasets");
      if (datasets !== null) {
        datasets.innerHTML = renderDatasets(state);
      }
      syncComposer(root, state);
    },
  };

  const controller = new ConsoleController(api, sink, { stream: true });
  root.innerHTML = renderApp(controller.state);

  const form = root.querySelector<HTMLFormElement>('[data-form="composer"]');
  const textarea = form?.querySelector<HTMLTextAreaElement>("textarea") ?? null;
  const fileInput =
    form?.querySelector<HTMLInputElement>('[data-action="upload"]') ?? null;

  form?.addEventListener("submit", (event) => {
    event.preventDefault();
    if (textarea === null) {
      return;
    }
    void controller.send(textarea.value).then((sent) => {
      if (sent) {
        textarea.value = "";
        syncComposer(root, controller.state);
      }
    });
  });
  textarea?.addEventListener("input", () => syncComposer(root, controller.state));
  fileInput?.addEventListener("change", () => {
    const file = fileInput.files?.[0];
    if (file === undefined) {
      return;
    }
    void controller.upload(file, file.name).then(() => {
      fileInput.value = "";
    });
  });

  root.addEventListener("click", (event) => {
    const target = event.target as HTMLElement | null;
    if (target === null) {
      return;
    }
    if (target.matches('[data-action="retry"]')) {
      void controller.retry().then(() => {
        if (controller.state.sessionId !== null) {
          window.location.hash = controller.state.sessionId;
        }
      });
    }
    const chip = target.closest<HTMLElement>("[data-dataset]");
    if (chip !== null && textarea !== null) {
      insertAtCursor(textarea, chip.dataset["dataset"] ?? "");
      syncComposer(root, controller.state);
    }
  });

  const fragment = window.location.hash.slice(1);
  const boot = fragment !== "" ? controller.resume(fragment) : controller.start();
  void boot.then(() => {
    if (controller.state.sessionId !== null) {
      window.location.hash = controller.state.sessionId;
    }
  });
  return controller;
}

function syncComposer(root: HTMLElement, state: ConsoleState): void {
  const form = root.querySelector<HTMLFormElement>('[data-form="composer"]');
  if (form === null) {
    return;
  }
  const textarea = form.querySelector<HTMLTextAreaElement>("textarea");
  const send = form.querySelector<HTMLButtonElement>('[data-action="send"]');
  const upload = form.querySelector<HTMLInputElement>('[data-action="upload"]');
  const locked = state.busy || state.connection !== "ok";
  if (textarea !== null) {
    textarea.disabled = locked;
  }
  if (send !== null) {
    send.disabled = locked || (textarea?.value.trim() ?? "") === "";
  }
  if (upload !== null) {
    upload.disabled = locked;
  }
}

function insertAtCursor(textarea: HTMLTextAreaElement, text: string): void {
  const start = textarea.selectionStart ?? textarea.value.length;
  const end = textarea.selectionEnd ?? textarea.value.length;
  textarea.setRangeText(text, start, end, "end");
  textarea.focus();
}
