// Thin HTTP client for the chat service. Only documented endpoints are
// touched: POST /chat and GET /healthz.

import { ChatAnswer, parseChatAnswer } from "./types.js";

export class ApiError extends Error {
    status: number;
    retryable: boolean;

    constructor(message: string, status: number) {
        super(message);
        this.name = "ApiError";
        this.status = status;
        // 4xx means the request itself was bad; retrying the same text
        // will not help. Network failures and 5xx are worth a retry.
        this.retryable = status === 0 || status >= 500;
    }
}

async function errorDetail(response: Response): Promise<string> {
    try {
        const body = (await response.json()) as Record<string, unknown>;
        if (typeof body.detail === "string") return body.detail;
    } catch {
        // non-JSON error body; fall through to the status line
    }
    return `request failed with status ${response.status}`;
}

export class ChatClient {
    readonly baseUrl: string;

    /** baseUrl "" means same-origin; otherwise e.g. "http://127.0.0.1:8000". */
    constructor(baseUrl: string) {
        this.baseUrl = baseUrl.replace(/\/+$/, "");
    }

    async send(text: string): Promise<ChatAnswer> {
        let response: Response;
        try {
            response = await fetch(`${this.baseUrl}/chat`, {
                method: "POST",
                headers: { "Content-Type": "application/json" },
                body: JSON.stringify({ text }),
            });
        } catch (err) {
            throw new ApiError(`cannot reach the service: ${String(err)}`, 0);
        }
        if (!response.ok) {
            throw new ApiError(await errorDetail(response), response.status);
        }
        return parseChatAnswer(await response.json());
    }

    async healthy(): Promise<boolean> {
        try {
            const response = await fetch(`${this.baseUrl}/healthz`);
            return response.ok;
        } catch {
            return false;
        }
    }
}
