// Glue between the input form, the transcript model and the service client.
// One request in flight at a time: the send control stays disabled until the
// current answer lands, and also while the input holds only whitespace.

import { ApiError, ChatClient } from "./client.js";
import { TranscriptView } from "./render.js";
import { Transcript } from "./transcript.js";

export interface ControllerElements {
    input: HTMLInputElement | HTMLTextAreaElement;
    sendButton: HTMLButtonElement;
    transcriptContainer: HTMLElement;
}

export class ChatController {
    readonly transcript = new Transcript();
    private client: ChatClient;
    private view: TranscriptView;
    private elements: ControllerElements;

    constructor(client: ChatClient, elements: ControllerElements) {
        this.client = client;
        this.elements = elements;
        this.view = new TranscriptView(elements.transcriptContainer, (id) => {
            void this.retry(id);
        });
        elements.input.addEventListener("input", () => this.updateControls());
        this.updateControls();
    }

    get canSend(): boolean {
        return this.elements.input.value.trim().length > 0 && !this.transcript.inFlight;
    }

    /** Send whatever is in the input box, if allowed. */
    async submit(): Promise<void> {
        if (!this.canSend) return;
        const text = this.elements.input.value.trim();
        this.elements.input.value = "";
        const requestId = this.transcript.begin(text);
        await this.dispatch(requestId, text);
    }

    private async retry(requestId: number): Promise<void> {
        if (this.transcript.inFlight) return;
        const text = this.transcript.textOf(requestId);
        this.transcript.retry(requestId);
        await this.dispatch(requestId, text);
    }

    private async dispatch(requestId: number, text: string): Promise<void> {
        this.refresh();
        try {
            const answer = await this.client.send(text);
            this.transcript.resolve(requestId, answer);
        } catch (err) {
            if (err instanceof ApiError) {
                this.transcript.fail(requestId, err.message, err.retryable);
            } else {
                this.transcript.fail(requestId, `unexpected response: ${String(err)}`, false);
            }
        }
        this.refresh();
    }

    private refresh(): void {
        this.view.sync(this.transcript.turns);
        this.updateControls();
    }

    private updateControls(): void {
        this.elements.sendButton.disabled = !this.canSend;
    }
}
