// Wire types for the chat service, mirroring its JSON responses exactly.

export type AnswerSource = "kg" | "qa" | "none";

export interface Alternative {
    question: string;
    answer: string;
    similarity: number;
}

export interface EntityRef {
    term: string;
    role: string;
    start: number;
    end: number;
    matched_via: string;
}

export interface Diagnostics {
    entities: EntityRef[];
    intent: string;
    note: string;
}

export interface ChatAnswer {
    source: AnswerSource;
    text: string;
    alternatives: Alternative[];
    diagnostics: Diagnostics;
}

// A transcript entry. Every send appends a user turn plus a bot turn that
// starts pending and is later resolved (or failed) by request id, so the
// rendered order always equals the send order.

export interface UserTurn {
    direction: "user";
    requestId: number;
    text: string;
    timestamp: number;
}

export type BotStatus = "pending" | "done" | "failed";

export interface BotTurn {
    direction: "bot";
    requestId: number;
    status: BotStatus;
    text: string;
    source: AnswerSource | null;
    alternatives: Alternative[];
    // for failed turns: what to tell the user, and whether retry makes sense
    errorMessage: string;
    retryable: boolean;
    timestamp: number;
}

export type ChatTurn = UserTurn | BotTurn;

const SOURCES: readonly string[] = ["kg", "qa", "none"];

function isAlternative(value: unknown): value is Alternative {
    if (typeof value !== "object" || value === null) return false;
    const alt = value as Record<string, unknown>;
    return (
        typeof alt.question === "string" &&
        typeof alt.answer === "string" &&
        typeof alt.similarity === "number"
    );
}

/** Narrow a parsed JSON body to ChatAnswer, or explain why it is not one. */
export function parseChatAnswer(body: unknown): ChatAnswer {
    if (typeof body !== "object" || body === null) {
        throw new Error("response body is not an object");
    }
    const obj = body as Record<string, unknown>;
    if (typeof obj.source !== "string" || !SOURCES.includes(obj.source)) {
        throw new Error(`unexpected source ${JSON.stringify(obj.source)}`);
    }
    if (typeof obj.text !== "string") {
        throw new Error("missing answer text");
    }
    if (!Array.isArray(obj.alternatives) || !obj.alternatives.every(isAlternative)) {
        throw new Error("malformed alternatives");
    }
    const diag = obj.diagnostics;
    if (typeof diag !== "object" || diag === null) {
        throw new Error("missing diagnostics");
    }
    const d = diag as Record<string, unknown>;
    return {
        source: obj.source as AnswerSource,
        text: obj.text,
        alternatives: obj.alternatives,
        diagnostics: {
            entities: Array.isArray(d.entities) ? (d.entities as EntityRef[]) : [],
            intent: typeof d.intent === "string" ? d.intent : "Unknown",
            note: typeof d.note === "string" ? d.note : "",
        },
    };
}
