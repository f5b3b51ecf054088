/** Unit tests for the editing session against a scripted fake client. */

import { describe, expect, test } from "vitest";

import { ApiError, Delta, ServiceClient } from "../src/api.js";
import { EditorSession } from "../src/session.js";

interface Call {
  kind: string;
  index?: number;
  point?: number[];
  revision: number | null;
  at: number;
}

function makeDelta(revision: number, changed: number[] = [0]): Delta {
  return {
    revision,
    topology: "open",
    points: [],
    segments: [],
    changed_segment_indices: changed,
    report: { average_Ep: 0, max_Ep: 0 },
  };
}

class FakeClient {
  calls: Call[] = [];
  revision = 0;
  /** Revisions that reject with 409 once when cited. */
  staleOnce = new Set<number>();
  delayMs = 0;
  inFlight = 0;
  maxInFlight = 0;

  private async handle(call: Call): Promise<Delta> {
    this.calls.push(call);
    this.inFlight += 1;
    this.maxInFlight = Math.max(this.maxInFlight, this.inFlight);
    try {
      if (this.delayMs > 0) await new Promise((r) => setTimeout(r, this.delayMs));
      if (call.revision !== null && this.staleOnce.has(call.revision)) {
        this.staleOnce.delete(call.revision);
        throw new ApiError(409, "stale revision");
      }
      this.revision += 1;
      return makeDelta(this.revision);
    } finally {
      this.inFlight -= 1;
    }
  }

  insertPoint(_id: string, point: number[], revision: number | null): Promise<Delta> {
    return this.handle({ kind: "insert", point, revision, at: Date.now() });
  }

  movePoint(
    _id: string,
    index: number,
    point: number[],
    revision: number | null,
  ): Promise<Delta> {
    return this.handle({ kind: "move", index, point, revision, at: Date.now() });
  }

  closeCurve(_id: string, revision: number | null): Promise<Delta> {
    return this.handle({ kind: "close", revision, at: Date.now() });
  }

  undo(_id: string, revision: number | null): Promise<Delta> {
    return this.handle({ kind: "undo", revision, at: Date.now() });
  }

  getDoc(_id: string) {
    return Promise.resolve({
      revision: this.revision,
      topology: "open",
      continuity: "C2",
      points: [],
      segments: [],
    });
  }
}

function makeSession(client: FakeClient, moveIntervalMs = 40): EditorSession {
  return new EditorSession(client as unknown as ServiceClient, "1", { moveIntervalMs });
}

describe("EditorSession", () => {
  test("drag moves are coalesced and throttled", async () => {
    const client = new FakeClient();
    const session = makeSession(client, 60);
    const targets = Array.from({ length: 12 }, (_v, i) => [i, i]);
    await Promise.all(targets.map((t) => session.movePoint(0, t)));

    // far fewer requests than drag samples, last position wins
    expect(client.calls.length).toBeLessThan(targets.length);
    expect(client.calls[client.calls.length - 1].point).toEqual([11, 11]);
    for (let i = 1; i < client.calls.length; i++) {
      expect(client.calls[i].at - client.calls[i - 1].at).toBeGreaterThanOrEqual(55);
    }
  });

  test("at most one edit request in flight", async () => {
    const client = new FakeClient();
    client.delayMs = 15;
    const session = makeSession(client, 1);
    await Promise.all([
      session.insertPoint([0, 0]),
      session.insertPoint([1, 1]),
      session.movePoint(0, [2, 2]),
      session.undo(),
    ]);
    expect(client.maxInFlight).toBe(1);
    expect(client.calls.map((c) => c.kind)).toEqual(["insert", "insert", "move", "undo"]);
  });

  test("requests carry the latest applied revision", async () => {
    const client = new FakeClient();
    const session = makeSession(client);
    await session.insertPoint([0, 0]);
    await session.insertPoint([1, 1]);
    await session.movePoint(0, [2, 2]);
    expect(client.calls.map((c) => c.revision)).toEqual([0, 1, 2]);
    expect(session.revision).toBe(3);
  });

  test("409 triggers one refetch-and-retry", async () => {
    const client = new FakeClient();
    const session = makeSession(client);
    await session.insertPoint([0, 0]);
    client.revision = 5; // another writer advanced the document
    client.staleOnce.add(1);
    const delta = await session.movePoint(0, [1, 1]);
    expect(delta.revision).toBe(6);
    expect(session.revision).toBe(6);
    const moves = client.calls.filter((c) => c.kind === "move");
    expect(moves.length).toBe(2);
    expect(moves[1].revision).toBe(5);
  });

  test("non-409 errors propagate to the caller", async () => {
    const client = new FakeClient();
    const session = makeSession(client);
    client.staleOnce.add(0);
    client.staleOnce.add(5); // retry fails too
    client.revision = 5;
    await expect(session.movePoint(0, [1, 1])).rejects.toMatchObject({ status: 409 });
  });

  test("frames are emitted once per applied delta", async () => {
    const client = new FakeClient();
    const session = makeSession(client);
    const revisions: number[] = [];
    session.onFrame((frame) => revisions.push(frame.revision));
    await session.insertPoint([0, 0]);
    await session.insertPoint([1, 1]);
    expect(revisions).toEqual([1, 2]);
  });
});
