// DOM rendering for the transcript. All user- and service-provided strings
// go through textContent, never innerHTML.

import { BotTurn, ChatTurn } from "./types.js";

function el<K extends keyof HTMLElementTagNameMap>(
    tag: K,
    className?: string,
    text?: string
): HTMLElementTagNameMap[K] {
    const node = document.createElement(tag);
    if (className) node.className = className;
    if (text !== undefined) node.textContent = text;
    return node;
}

function timeLabel(timestamp: number): string {
    return new Date(timestamp).toLocaleTimeString([], { hour: "2-digit", minute: "2-digit" });
}

function botBubble(turn: BotTurn, onRetry: (requestId: number) => void): HTMLElement {
    const bubble = el("div", "bubble");
    if (turn.status === "pending") {
        bubble.classList.add("pending");
        bubble.appendChild(el("span", "dots", "…"));
        return bubble;
    }
    if (turn.status === "failed") {
        bubble.classList.add("error");
        bubble.appendChild(el("p", "error-text", turn.errorMessage));
        if (turn.retryable) {
            const button = el("button", "retry", "Retry");
            button.type = "button";
            button.addEventListener("click", () => onRetry(turn.requestId));
            bubble.appendChild(button);
        }
        return bubble;
    }
    // a finished bot turn always carries its source badge
    const source = turn.source ?? "none";
    bubble.appendChild(el("span", `badge badge-${source}`, source));
    bubble.appendChild(el("p", "answer", turn.text));
    if (turn.alternatives.length > 0) {
        const details = el("details", "alternatives");
        details.appendChild(el("summary", undefined, `${turn.alternatives.length} similar questions`));
        const list = el("ul");
        for (const alt of turn.alternatives) {
            const item = el("li");
            item.appendChild(el("span", "alt-similarity", alt.similarity.toFixed(3)));
            item.appendChild(el("span", "alt-question", alt.question));
            item.appendChild(el("p", "alt-answer", alt.answer));
            list.appendChild(item);
        }
        details.appendChild(list);
        bubble.appendChild(details);
    }
    return bubble;
}

export class TranscriptView {
    private container: HTMLElement;
    private onRetry: (requestId: number) => void;

    constructor(container: HTMLElement, onRetry: (requestId: number) => void) {
        this.container = container;
        this.onRetry = onRetry;
    }

    /** Bring the DOM in line with the transcript; existing turns keep their place. */
    sync(turns: readonly ChatTurn[]): void {
        for (const turn of turns) {
            const key = `${turn.direction}-${turn.requestId}`;
            let node = this.container.querySelector<HTMLElement>(`[data-key="${key}"]`);
            if (!node) {
                node = el("div", `turn ${turn.direction}`);
                node.dataset.key = key;
                this.container.appendChild(node);
            }
            const status = turn.direction === "bot" ? turn.status : "user";
            if (node.dataset.status === status) continue;
            node.dataset.status = status;
            node.replaceChildren();
            if (turn.direction === "user") {
                node.appendChild(el("div", "bubble", turn.text));
            } else {
                node.appendChild(botBubble(turn, this.onRetry));
            }
            node.appendChild(el("span", "time", timeLabel(turn.timestamp)));
        }
        this.container.scrollTop = this.container.scrollHeight;
    }
}
