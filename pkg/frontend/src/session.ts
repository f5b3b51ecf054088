/**
 * Editing session: serializes edits to one document over the service API.
 *
 * Guarantees:
 * - at most one edit request in flight; queued edits are sent in order
 * - drag moves are throttled (default 20/s) and coalesced to the latest
 *   position while waiting
 * - every request carries the revision of the last applied response; a 409
 *   (stale revision) triggers one refetch-and-retry
 * - local state is only ever replaced by service responses, never computed
 */

import { ApiError, Delta, Segment, ServiceClient } from "./api.js";

export interface Frame {
  revision: number;
  topology: string;
  points: number[][];
  segments: Segment[];
  changedSegmentIndices: number[];
}

interface QueuedEdit {
  kind: "insert" | "move" | "close" | "undo";
  index?: number;
  point?: number[];
  resolve: (delta: Delta) => void;
  reject: (error: unknown) => void;
  promise: Promise<Delta>;
}

export interface SessionOptions {
  /** Minimum interval between move requests, in milliseconds. */
  moveIntervalMs?: number;
  now?: () => number;
  sleep?: (ms: number) => Promise<void>;
}

const defaultSleep = (ms: number) => new Promise<void>((r) => setTimeout(r, ms));

export class EditorSession {
  revision = 0;
  topology = "open";
  points: number[][] = [];
  segments: Segment[] = [];
  /** Count of edits the service accepted in this session. */
  acceptedEdits = 0;

  private readonly moveIntervalMs: number;
  private readonly now: () => number;
  private readonly sleep: (ms: number) => Promise<void>;
  private readonly frameListeners: Array<(frame: Frame) => void> = [];
  private queue: QueuedEdit[] = [];
  private inFlight = false;
  private lastMoveAt = -Infinity;

  constructor(
    private readonly client: ServiceClient,
    readonly docId: string,
    options: SessionOptions = {},
  ) {
    this.moveIntervalMs = options.moveIntervalMs ?? 50;
    this.now = options.now ?? (() => Date.now());
    this.sleep = options.sleep ?? defaultSleep;
  }

  static async create(
    client: ServiceClient,
    continuity = "C2",
    options: SessionOptions = {},
  ): Promise<EditorSession> {
    const { id, revision } = await client.createDoc(continuity);
    const session = new EditorSession(client, id, options);
    session.revision = revision;
    return session;
  }

  onFrame(listener: (frame: Frame) => void): void {
    this.frameListeners.push(listener);
  }

  insertPoint(point: number[]): Promise<Delta> {
    return this.enqueue({ kind: "insert", point });
  }

  /**
   * Request a point move. While an earlier move of the same point is still
   * queued (not yet sent), the queued request is updated to the latest
   * position instead of growing the queue.
   */
  movePoint(index: number, point: number[]): Promise<Delta> {
    const tail = this.queue[this.queue.length - 1];
    if (tail && tail.kind === "move" && tail.index === index) {
      tail.point = point;
      return tail.promise;
    }
    return this.enqueue({ kind: "move", index, point });
  }

  closeCurve(): Promise<Delta> {
    return this.enqueue({ kind: "close" });
  }

  undo(): Promise<Delta> {
    return this.enqueue({ kind: "undo" });
  }

  private enqueue(edit: Omit<QueuedEdit, "resolve" | "reject" | "promise">): Promise<Delta> {
    let resolve!: (delta: Delta) => void;
    let reject!: (error: unknown) => void;
    const promise = new Promise<Delta>((res, rej) => {
      resolve = res;
      reject = rej;
    });
    this.queue.push({ ...edit, resolve, reject, promise });
    void this.pump();
    return promise;
  }

  private async pump(): Promise<void> {
    if (this.inFlight) return;
    this.inFlight = true;
    try {
      while (this.queue.length > 0) {
        const head = this.queue[0];
        if (head.kind === "move") {
          const wait = this.lastMoveAt + this.moveIntervalMs - this.now();
          if (wait > 0) await this.sleep(wait);
        }
        // dequeue only now: drag updates may have coalesced into `head`
        this.queue.shift();
        try {
          const delta = await this.sendWithRetry(head);
          this.applyDelta(delta);
          head.resolve(delta);
        } catch (error) {
          head.reject(error);
        }
      }
    } finally {
      this.inFlight = false;
    }
  }

  private async sendWithRetry(edit: QueuedEdit): Promise<Delta> {
    try {
      return await this.send(edit);
    } catch (error) {
      if (error instanceof ApiError && error.status === 409) {
        await this.refetch();
        return this.send(edit);
      }
      throw error;
    }
  }

  private send(edit: QueuedEdit): Promise<Delta> {
    if (edit.kind === "move") this.lastMoveAt = this.now();
    switch (edit.kind) {
      case "insert":
        return this.client.insertPoint(this.docId, edit.point!, this.revision);
      case "move":
        return this.client.movePoint(this.docId, edit.index!, edit.point!, this.revision);
      case "close":
        return this.client.closeCurve(this.docId, this.revision);
      case "undo":
        return this.client.undo(this.docId, this.revision);
    }
  }

  private applyDelta(delta: Delta): void {
    if (delta.revision <= this.revision) return; // stale response, ignore
    this.revision = delta.revision;
    this.topology = delta.topology;
    this.points = delta.points;
    this.segments = delta.segments;
    this.acceptedEdits += 1;
    this.emitFrame(delta.changed_segment_indices);
  }

  /** Resynchronize from the full document (used after a stale-revision 409). */
  async refetch(): Promise<void> {
    const doc = await this.client.getDoc(this.docId);
    this.revision = doc.revision;
    this.topology = doc.topology;
    this.points = doc.points;
    this.segments = doc.segments;
    this.emitFrame(this.segments.map((_s, i) => i));
  }

  private emitFrame(changed: number[]): void {
    const frame: Frame = {
      revision: this.revision,
      topology: this.topology,
      points: this.points,
      segments: this.segments,
      changedSegmentIndices: changed,
    };
    for (const listener of this.frameListeners) listener(frame);
  }
}
