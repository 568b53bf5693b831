import { describe, expect, it } from "vitest";

import {
  applyEvent,
  applyEvents,
  initialState,
  stepCards,
  type ConsoleState,
} from "../src/state.js";
import type { ServerEvent } from "../src/types.js";

function subtask(id: number, action: string, status = "pending") {
  return {
    id,
    description: `step ${id}`,
    action,
    econometric_tag: null,
    depends_on: id > 1 ? [id - 1] : [],
    status,
    selected_tool: null,
    attempts: 0,
  };
}

function planPayload(statuses: string[]): Record<string, unknown> {
  const actions = ["data_loading", "exploratory_analysis", "estimation", "reporting"];
  return {
    template_name: "propensity",
    created_from: "backend",
    subtasks: statuses.map((status, i) => subtask(i + 1, actions[i], status)),
    notes: [],
  };
}

function runEvents(): ServerEvent[] {
  const events: ServerEvent[] = [
    { seq: 1, kind: "plan", payload: planPayload(["pending", "pending", "pending", "pending"]) },
  ];
  let seq = 1;
  for (let id = 1; id <= 4; id += 1) {
    events.push(
      { seq: (seq += 1), kind: "step_started", payload: { id, action: "x" } },
      { seq: (seq += 1), kind: "step_attempt", payload: { id, attempt: 1, ok: true, error: null } },
      { seq: (seq += 1), kind: "step_finished", payload: { id, status: "done", attempts: 1 } },
    );
  }
  events.push({
    seq: (seq += 1),
    kind: "report",
    payload: { json_text: '{"coefficient": 1.5, "standard_error": 0.2, "p-value": 0.0}', method: "ols" },
  });
  return events;
}

describe("applyEvent", () => {
  it("mirrors the plan payload into step cards exactly", () => {
    const state = applyEvent(initialState(), {
      seq: 1,
      kind: "plan",
      payload: planPayload(["pending", "pending", "pending", "pending"]),
    });
    const cards = stepCards(state);
    expect(cards.map((c) => c.id)).toEqual([1, 2, 3, 4]);
    expect(cards.map((c) => c.status)).toEqual(["pending", "pending", "pending", "pending"]);
    expect(cards.map((c) => c.action)).toEqual([
      "data_loading",
      "exploratory_analysis",
      "estimation",
      "reporting",
    ]);
  });

  it("tracks the step lifecycle through started, attempt and finished", () => {
    let state = applyEvents(initialState(), runEvents().slice(0, 2));
    expect(stepCards(state)[0].running).toBe(true);

    state = applyEvents(state, runEvents().slice(2, 4));
    const card = stepCards(state)[0];
    expect(card.running).toBe(false);
    expect(card.status).toBe("done");
    expect(card.attempts).toBe(1);
  });

  it("is idempotent under replay of the same sequence numbers", () => {
    const events = runEvents();
    const once = applyEvents(initialState(), events);
    const twice = applyEvents(once, events);
    expect(twice).toEqual(once);

    // Interleaved duplicates (stream plus catch-up poll) also change nothing.
    let interleaved = initialState();
    for (const event of events) {
      interleaved = applyEvent(interleaved, event);
      interleaved = applyEvent(interleaved, event);
    }
    expect(interleaved).toEqual(once);
  });

  it("ignores stale sequence numbers", () => {
    const state = applyEvents(initialState(), runEvents());
    const replayed = applyEvent(state, {
      seq: 1,
      kind: "plan",
      payload: planPayload(["pending", "pending", "pending", "pending"]),
    });
    expect(replayed).toBe(state);
  });

  it("resets only the revised cards on plan_revised", () => {
    const done = applyEvents(initialState(), runEvents());
    expect(stepCards(done).map((c) => c.status)).toEqual(["done", "done", "done", "done"]);

    const revised = applyEvent(done, {
      seq: done.lastSeq + 1,
      kind: "plan_revised",
      payload: planPayload(["done", "done", "pending", "pending"]),
    });
    expect(stepCards(revised).map((c) => c.status)).toEqual([
      "done",
      "done",
      "pending",
      "pending",
    ]);
    // Progress notes for the reset steps are gone; settled cards untouched.
    expect(stepCards(revised)[2].running).toBe(false);
    expect(stepCards(revised)[2].attempts).toBe(0);
    expect(stepCards(revised)[0].attempts).toBe(0);
  });

  it("keeps the report until a new plan clears it", () => {
    const done = applyEvents(initialState(), runEvents());
    expect(done.reportJson).toContain('"coefficient"');
    expect(done.reportMethod).toBe("ols");

    const fresh = applyEvent(done, {
      seq: done.lastSeq + 1,
      kind: "plan",
      payload: planPayload(["pending", "pending", "pending", "pending"]),
    });
    expect(fresh.reportJson).toBeNull();
    expect(fresh.resultText).toBeNull();
  });

  it("clears the stored result text when a new report arrives", () => {
    const done: ConsoleState = {
      ...applyEvents(initialState(), runEvents()),
      resultText: "old bytes",
    };
    const next = applyEvent(done, {
      seq: done.lastSeq + 1,
      kind: "report",
      payload: { json_text: "{}", method: "ols" },
    });
    expect(next.resultText).toBeNull();
  });

  it("records attempt errors and failure excerpts", () => {
    let state = applyEvents(initialState(), [
      { seq: 1, kind: "plan", payload: planPayload(["pending", "pending", "pending", "pending"]) },
      { seq: 2, kind: "step_started", payload: { id: 1, action: "data_loading" } },
      {
        seq: 3,
        kind: "step_attempt",
        payload: { id: 1, attempt: 1, ok: false, error: "no dataset path found" },
      },
      { seq: 4, kind: "step_finished", payload: { id: 1, status: "failed", attempts: 3 } },
      { seq: 5, kind: "failure", payload: { id: 1, errors: ["no dataset path found"] } },
    ]);
    const card = stepCards(state)[0];
    expect(card.status).toBe("failed");
    expect(card.attempts).toBe(3);
    expect(card.lastError).toBe("no dataset path found");
    expect(state.failure).toEqual({ subtaskId: 1, errors: ["no dataset path found"] });

    // A later successful report clears the failure.
    state = applyEvent(state, {
      seq: 6,
      kind: "report",
      payload: { json_text: "{}", method: "ols" },
    });
    expect(state.failure).toBeNull();
  });

  it("passes unknown event kinds through without effect beyond the cursor", () => {
    const state = applyEvent(initialState(), {
      seq: 1,
      kind: "something_new",
      payload: { anything: true },
    });
    expect(state.lastSeq).toBe(1);
    expect(state.plan).toBeNull();
  });
});
