/**
 * Typed client for the curve session service JSON API.
 *
 * The service owns all geometry: every segment the editor draws originated
 * from one of these responses.
 */

export interface Segment {
  degree: number;
  control_points: number[][];
  t_interp: number;
  point_index: number;
  parabola: number[];
}

export interface EnergySummary {
  average_Ep: number;
  max_Ep: number;
}

/** Response to every accepted edit: full geometry plus the changed indices. */
export interface Delta {
  revision: number;
  topology: string;
  points: number[][];
  segments: Segment[];
  changed_segment_indices: number[];
  report: EnergySummary;
}

export interface DocumentState {
  revision: number;
  topology: string;
  continuity: string;
  points: number[][];
  segments: Segment[];
}

export interface CombData {
  base_points: number[][];
  tip_points: number[][];
  scale: number;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

async function parseJson(response: Response): Promise<unknown> {
  if (!response.ok) {
    let detail = response.statusText;
    try {
      const body = (await response.json()) as { detail?: string };
      if (body.detail) detail = body.detail;
    } catch {
      // keep the status text
    }
    throw new ApiError(response.status, detail);
  }
  return response.json();
}

export class ServiceClient {
  constructor(readonly baseUrl: string) {}

  private async post(path: string, body: unknown): Promise<unknown> {
    const response = await fetch(this.baseUrl + path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    return parseJson(response);
  }

  async createDoc(continuity = "C2"): Promise<{ id: string; revision: number }> {
    return (await this.post("/doc", { continuity })) as { id: string; revision: number };
  }

  async insertPoint(docId: string, point: number[], revision: number | null): Promise<Delta> {
    return (await this.post(`/doc/${docId}/point`, { point, revision })) as Delta;
  }

  async movePoint(
    docId: string,
    index: number,
    point: number[],
    revision: number | null,
  ): Promise<Delta> {
    return (await this.post(`/doc/${docId}/move`, { index, point, revision })) as Delta;
  }

  async closeCurve(docId: string, revision: number | null): Promise<Delta> {
    return (await this.post(`/doc/${docId}/close`, { revision })) as Delta;
  }

  async undo(docId: string, revision: number | null): Promise<Delta> {
    return (await this.post(`/doc/${docId}/undo`, { revision })) as Delta;
  }

  async getDoc(docId: string): Promise<DocumentState> {
    const response = await fetch(`${this.baseUrl}/doc/${docId}`);
    return (await parseJson(response)) as DocumentState;
  }

  async getComb(docId: string, scale: number, samples = 32): Promise<CombData> {
    const response = await fetch(
      `${this.baseUrl}/doc/${docId}/comb?scale=${scale}&samples=${samples}`,
    );
    return (await parseJson(response)) as CombData;
  }
}
