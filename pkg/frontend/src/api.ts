import type { Direction, SearchResponse, TraceRecord } from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ServiceError extends Error {
    constructor(message: string, readonly status: number) {
        super(message);
    }
}

/** Thin typed client for the search service; base URL is the only config. */
export class ServiceClient {
    private readonly fetchImpl: FetchLike;

    constructor(readonly baseUrl: string, fetchImpl?: FetchLike) {
        this.fetchImpl = fetchImpl ?? ((input, init) => fetch(input, init));
    }

    async search(sessionId: string, query: string, direction?: Direction): Promise<SearchResponse> {
        const body: Record<string, string> = { session_id: sessionId, query };
        if (direction) {
            body.direction = direction;
        }
        const response = await this.fetchImpl(`${this.baseUrl}/search`, {
            method: "POST",
            headers: { "content-type": "application/json" },
            body: JSON.stringify(body),
        });
        if (!response.ok) {
            throw new ServiceError(await describeFailure(response), response.status);
        }
        return (await response.json()) as SearchResponse;
    }

    async explain(traceId: string): Promise<TraceRecord> {
        const response = await this.fetchImpl(`${this.baseUrl}/explain/${encodeURIComponent(traceId)}`);
        if (!response.ok) {
            throw new ServiceError(await describeFailure(response), response.status);
        }
        return (await response.json()) as TraceRecord;
    }
}

async function describeFailure(response: Response): Promise<string> {
    try {
        const payload = (await response.json()) as { detail?: unknown };
        if (typeof payload.detail === "string") {
            return payload.detail;
        }
        if (payload.detail !== undefined) {
            return JSON.stringify(payload.detail);
        }
    } catch {
        // non-JSON error body; fall through to the status line
    }
    return `service responded ${response.status}`;
}
