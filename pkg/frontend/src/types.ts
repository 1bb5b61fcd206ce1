// Shapes of the service's canonical response records. The client renders
// these verbatim; it never computes scores or conclusions of its own.

export interface FactRecord {
    statement: string;
    confidence: number;
    doc_ids: number[];
    snippet: string;
}

export interface ConclusionRecord {
    statement: string;
    confidence: number;
    trace_id: string;
}

export interface HitRecord {
    doc_id: number;
    score: number;
    per_term_counts: Record<string, number>;
}

export interface QueryEcho {
    weighted_terms: Record<string, number>;
    linked_from_history: string[];
}

export interface ResultRecord {
    query: QueryEcho;
    facts: FactRecord[];
    conclusions: ConclusionRecord[];
    hits: HitRecord[];
}

export interface SearchResponse {
    result: ResultRecord;
    meta: {
        cache: string;
        engine_version: string;
        rulebase_version: string;
        compiled_key?: string;
    };
}

export interface TraceStepRecord {
    rule_id: string;
    rule_text: string;
    rule_confidence: number;
    conditions: string[];
    produced: string;
    confidence: number;
}

export interface TraceRecord {
    trace_id: string;
    steps: TraceStepRecord[];
}

export type Direction = "left_to_right" | "right_to_left";
