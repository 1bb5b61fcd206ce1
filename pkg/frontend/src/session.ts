import type { Direction, ResultRecord, SearchResponse } from "./types.js";

export interface TranscriptEntry {
    query: string;
    summary: string;
}

export interface SubmitOptions {
    direction?: Direction;
    useHistory: boolean;
}

export type SearchFn = (sessionId: string, query: string, direction?: Direction) => Promise<SearchResponse>;

export function freshSessionId(random: () => number = Math.random): string {
    return `s-${Math.floor(random() * 1e9).toString(36)}-${Date.now().toString(36)}`;
}

export function summarize(result: ResultRecord): string {
    const facts = result.facts.length;
    const conclusions = result.conclusions.length;
    const top = result.conclusions[0]?.statement ?? result.facts[0]?.statement ?? "no matches";
    return `${facts} fact${facts === 1 ? "" : "s"}, ${conclusions} conclusion${conclusions === 1 ? "" : "s"} — ${top}`;
}

/**
 * Owns the session id, the transcript and the submission queue.
 *
 * With the history toggle on, every request reuses one session id so the
 * server can link consecutive requests; toggled off, each request is sent
 * under a fresh session id (same query, no history linkage). Submissions
 * are processed one at a time in arrival order.
 */
export class SessionController {
    private sessionId: string;
    private queue: Promise<void> = Promise.resolve();
    readonly transcript: TranscriptEntry[] = [];
    linked = false;

    constructor(
        private readonly search: SearchFn,
        private readonly newSessionId: () => string = freshSessionId,
    ) {
        this.sessionId = this.newSessionId();
    }

    get currentSessionId(): string {
        return this.sessionId;
    }

    /** Queue a query; resolves with the response once its turn completes. */
    submit(query: string, options: SubmitOptions): Promise<SearchResponse> {
        const run = this.queue.then(async () => {
            if (!options.useHistory) {
                this.sessionId = this.newSessionId();
            }
            const response = await this.search(this.sessionId, query, options.direction);
            this.transcript.push({ query, summary: summarize(response.result) });
            this.linked = response.result.query.linked_from_history.length > 0;
            return response;
        });
        this.queue = run.then(
            () => undefined,
            () => undefined,
        );
        return run;
    }
}
