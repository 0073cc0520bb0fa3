// Append-only conversation transcript.
//
// begin() appends a user turn and a pending bot turn in one step and hands
// back the request id. resolve()/fail() fill the pending bot turn matched
// by that id without moving it, so transcript order is send order even if
// responses arrive out of order.

import { ChatAnswer, BotTurn, ChatTurn, UserTurn } from "./types.js";

export class Transcript {
    private entries: ChatTurn[] = [];
    private nextId = 1;
    private pending = new Map<number, BotTurn>();

    /** Append a user turn plus its pending bot slot; returns the request id. */
    begin(text: string, now: number = Date.now()): number {
        const requestId = this.nextId++;
        const user: UserTurn = { direction: "user", requestId, text, timestamp: now };
        const bot: BotTurn = {
            direction: "bot",
            requestId,
            status: "pending",
            text: "",
            source: null,
            alternatives: [],
            errorMessage: "",
            retryable: false,
            timestamp: now,
        };
        this.entries.push(user, bot);
        this.pending.set(requestId, bot);
        return requestId;
    }

    /** Fill the pending bot turn for this request with a real answer. */
    resolve(requestId: number, answer: ChatAnswer, now: number = Date.now()): BotTurn {
        const bot = this.take(requestId);
        bot.status = "done";
        bot.text = answer.text;
        bot.source = answer.source;
        bot.alternatives = answer.alternatives;
        bot.errorMessage = "";
        bot.retryable = false;
        bot.timestamp = now;
        return bot;
    }

    /** Mark the pending bot turn failed; it can later be put back in flight. */
    fail(requestId: number, message: string, retryable: boolean, now: number = Date.now()): BotTurn {
        const bot = this.take(requestId);
        bot.status = "failed";
        bot.errorMessage = message;
        bot.retryable = retryable;
        bot.timestamp = now;
        return bot;
    }

    /** Flip a failed turn back to pending for a retry of the same request id. */
    retry(requestId: number): BotTurn {
        const bot = this.entries.find(
            (t): t is BotTurn => t.direction === "bot" && t.requestId === requestId
        );
        if (!bot || bot.status !== "failed") {
            throw new Error(`request ${requestId} is not in a failed state`);
        }
        bot.status = "pending";
        bot.errorMessage = "";
        bot.retryable = false;
        this.pending.set(requestId, bot);
        return bot;
    }

    /** The user text that started a request (needed to retry it). */
    textOf(requestId: number): string {
        const user = this.entries.find(
            (t): t is UserTurn => t.direction === "user" && t.requestId === requestId
        );
        if (!user) throw new Error(`unknown request ${requestId}`);
        return user.text;
    }

    get turns(): readonly ChatTurn[] {
        return this.entries;
    }

    get inFlight(): boolean {
        return this.pending.size > 0;
    }

    private take(requestId: number): BotTurn {
        const bot = this.pending.get(requestId);
        if (!bot) throw new Error(`no pending request ${requestId}`);
        this.pending.delete(requestId);
        return bot;
    }
}
