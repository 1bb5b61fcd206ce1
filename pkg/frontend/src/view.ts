import type { ConclusionRecord, FactRecord, ResultRecord, TraceRecord } from "./types.js";
import type { TranscriptEntry } from "./session.js";

export type TraceLoader = (traceId: string) => Promise<TraceRecord>;

function el<K extends keyof HTMLElementTagNameMap>(
    tag: K,
    className?: string,
    text?: string,
): HTMLElementTagNameMap[K] {
    const node = document.createElement(tag);
    if (className) {
        node.className = className;
    }
    if (text !== undefined) {
        node.textContent = text;
    }
    return node;
}

function confidenceBadge(confidence: number, derived: boolean): HTMLElement {
    const badge = el("span", derived ? "badge badge-derived" : "badge", `${Math.round(confidence * 100)}%`);
    if (derived) {
        badge.textContent += " derived";
        badge.title = "produced by rules, not found directly";
    }
    return badge;
}

function factRow(fact: FactRecord): HTMLElement {
    const row = el("li", "fact-row");
    row.appendChild(el("span", "statement", fact.statement));
    row.appendChild(confidenceBadge(fact.confidence, false));
    row.appendChild(el("span", "citation", `docs ${fact.doc_ids.join(", ")}`));
    if (fact.snippet) {
        row.appendChild(el("div", "snippet", `…${fact.snippet}…`));
    }
    return row;
}

function traceList(trace: TraceRecord): HTMLElement {
    const steps = el("ol", "trace-steps");
    for (const step of trace.steps) {
        const item = el("li", "trace-step");
        item.appendChild(el("code", "rule-text", step.rule_text));
        item.appendChild(
            el("span", "step-detail", `matched: ${step.conditions.join(" AND ")} ⇒ ${step.produced}`),
        );
        item.appendChild(confidenceBadge(step.confidence, true));
        steps.appendChild(item);
    }
    return steps;
}

function conclusionRow(conclusion: ConclusionRecord, loadTrace: TraceLoader): HTMLElement {
    const row = el("li", "conclusion-row");
    row.appendChild(el("span", "statement", conclusion.statement));
    row.appendChild(confidenceBadge(conclusion.confidence, true));
    const toggle = el("button", "trace-toggle", "explain");
    toggle.type = "button";
    const holder = el("div", "trace-holder");
    holder.hidden = true;
    toggle.addEventListener("click", async () => {
        if (!holder.hidden) {
            holder.hidden = true;
            toggle.textContent = "explain";
            return;
        }
        if (!holder.hasChildNodes()) {
            toggle.disabled = true;
            try {
                holder.appendChild(traceList(await loadTrace(conclusion.trace_id)));
            } catch (error) {
                holder.appendChild(el("div", "error-inline", `trace unavailable: ${String(error)}`));
            } finally {
                toggle.disabled = false;
            }
        }
        holder.hidden = false;
        toggle.textContent = "hide";
    });
    row.appendChild(toggle);
    row.appendChild(holder);
    return row;
}

function panel(title: string, rows: HTMLElement[], emptyNote: string): HTMLElement {
    const section = el("section", "panel");
    section.appendChild(el("h2", undefined, title));
    if (!rows.length) {
        section.appendChild(el("p", "placeholder", emptyNote));
        return section;
    }
    const list = el("ul", "rows");
    for (const row of rows) {
        list.appendChild(row);
    }
    section.appendChild(list);
    return section;
}

/** Two panels side by side (facts | conclusions) with the hit list below. */
export function renderResult(container: HTMLElement, result: ResultRecord, loadTrace: TraceLoader): void {
    container.textContent = "";
    const panels = el("div", "panels");
    panels.appendChild(panel("FACTS", result.facts.map(factRow), "no facts"));
    panels.appendChild(
        panel("CONCLUSIONS", result.conclusions.map((c) => conclusionRow(c, loadTrace)), "no conclusions"),
    );
    container.appendChild(panels);

    const hits = el("section", "hits");
    hits.appendChild(el("h2", undefined, "HITS"));
    if (result.hits.length) {
        const list = el("ol", "hit-list");
        for (const hit of result.hits) {
            list.appendChild(el("li", "hit", `doc ${hit.doc_id} — score ${hit.score}`));
        }
        hits.appendChild(list);
    } else {
        hits.appendChild(el("p", "placeholder", "no matching documents"));
    }
    container.appendChild(hits);
}

export function renderError(container: HTMLElement, message: string): void {
    container.textContent = "";
    container.appendChild(el("div", "error-banner", message));
}

export function renderTranscript(container: HTMLElement, entries: TranscriptEntry[], linked: boolean): void {
    container.textContent = "";
    container.appendChild(el("h2", undefined, "SESSION"));
    const indicator = el(
        "p",
        linked ? "link-indicator linked" : "link-indicator",
        linked ? "↳ linked to the previous request" : "not linked to the previous request",
    );
    if (entries.length < 2 && !linked) {
        indicator.textContent = "";
    }
    container.appendChild(indicator);
    const list = el("ol", "transcript");
    for (const entry of entries) {
        list.appendChild(el("li", "transcript-entry", `${entry.query} → ${entry.summary}`));
    }
    container.appendChild(list);
}
