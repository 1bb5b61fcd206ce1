import { ServiceClient } from "./api.js";
import { SessionController } from "./session.js";
import { renderError, renderResult, renderTranscript } from "./view.js";
import type { Direction } from "./types.js";

function requireElement<T extends HTMLElement>(id: string): T {
    const node = document.getElementById(id);
    if (!node) {
        throw new Error(`missing element #${id}`);
    }
    return node as T;
}

document.addEventListener("DOMContentLoaded", () => {
    const params = new URLSearchParams(window.location.search);
    const baseUrl = params.get("service") ?? "http://127.0.0.1:8000";
    const client = new ServiceClient(baseUrl);
    const controller = new SessionController((sid, q, d) => client.search(sid, q, d));

    const form = requireElement<HTMLFormElement>("searchForm");
    const input = requireElement<HTMLInputElement>("queryInput");
    const submit = requireElement<HTMLButtonElement>("startButton");
    const directionToggle = requireElement<HTMLInputElement>("directionToggle");
    const historyToggle = requireElement<HTMLInputElement>("historyToggle");
    const resultsPane = requireElement<HTMLDivElement>("results");
    const sessionPane = requireElement<HTMLDivElement>("session");

    const updateSubmitState = () => {
        submit.disabled = input.value.trim().length === 0;
    };
    input.addEventListener("input", updateSubmitState);
    updateSubmitState();

    form.addEventListener("submit", (event) => {
        event.preventDefault();
        const query = input.value.trim();
        if (!query) {
            return;
        }
        const direction: Direction = directionToggle.checked ? "right_to_left" : "left_to_right";
        submit.classList.add("busy");
        controller
            .submit(query, { direction, useHistory: historyToggle.checked })
            .then((response) => {
                renderResult(resultsPane, response.result, (traceId) => client.explain(traceId));
                renderTranscript(sessionPane, controller.transcript, controller.linked);
            })
            .catch((error) => {
                renderError(resultsPane, String(error));
            })
            .finally(() => {
                submit.classList.remove("busy");
                updateSubmitState();
            });
    });
});
