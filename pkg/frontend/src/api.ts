/**
 * Typed client for the election service HTTP API.
 *
 * Every request body and URL is recorded in `captured` so tests (and a
 * cautious voter) can confirm that no raw credential material ever
 * leaves the page; the fetch implementation is injectable so the test
 * harness can play a tampering service.
 */

export interface CapturedRequest {
  method: string;
  url: string;
  body: string | null;
}

export interface Rejection {
  reason: string;
  detail: string;
  status: number;
}

export class ApiError extends Error {
  constructor(public rejection: Rejection) {
    super(`${rejection.reason}: ${rejection.detail}`);
  }
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export interface ElectionInfo {
  election_id: string;
  n_candidates: number;
  candidates: string[];
  voter_bound: number;
  tier: string;
  p: string;
  q: string;
  g1: string;
  g2: string;
  c: string;
  d: string;
  h: string;
  external_nullifier: string;
  closed: boolean;
  head_hash: string;
}

export class BoothApi {
  captured: CapturedRequest[] = [];

  constructor(
    private base: string,
    private fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const url = this.base + path;
    const payload = body === undefined ? null : JSON.stringify(body);
    this.captured.push({ method, url, body: payload });
    const response = await this.fetchImpl(url, {
      method,
      headers: payload === null ? undefined : { "Content-Type": "application/json" },
      body: payload ?? undefined,
    });
    const text = await response.text();
    if (!response.ok) {
      let rejection: Rejection;
      try {
        const doc = JSON.parse(text);
        rejection = {
          reason: doc.reason ?? "http_error",
          detail: doc.detail ?? text,
          status: response.status,
        };
      } catch {
        rejection = { reason: "http_error", detail: text, status: response.status };
      }
      throw new ApiError(rejection);
    }
    return JSON.parse(text) as T;
  }

  register(voterId: string): Promise<{ voter_id: string; internal_nullifier: string; commitment: string }> {
    return this.request("POST", "/register", { voter_id: voterId });
  }

  election(): Promise<ElectionInfo> {
    return this.request("GET", "/election");
  }

  registryRoot(): Promise<{ root: string; leaf_count: number; external_nullifier: string }> {
    return this.request("GET", "/registry/root");
  }

  registryPath(
    commitmentHex: string,
  ): Promise<{ leaf_index: number; siblings: string[]; path_bits: number[]; root: string }> {
    return this.request("GET", `/registry/path/${commitmentHex}`);
  }

  createSession(payload: string): Promise<{ token: string }> {
    return this.request("POST", "/session", { payload });
  }

  castVote(token: string, candidate: number): Promise<{ first: string }> {
    return this.request("POST", `/session/${token}/vote`, { candidate });
  }

  decide(
    token: string,
    choice: "audit" | "confirm",
  ): Promise<{ second: string; receipt_index: number; choice: string }> {
    return this.request("POST", `/session/${token}/decision`, { choice });
  }

  async boardReceipt(index: number): Promise<string | null> {
    try {
      const doc = await this.request<{ receipt: string }>("GET", `/board/receipt/${index}`);
      return doc.receipt;
    } catch (err) {
      if (err instanceof ApiError && err.rejection.status === 404) return null;
      throw err;
    }
  }
}
