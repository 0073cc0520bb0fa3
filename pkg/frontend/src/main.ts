// Page bootstrap. The service base URL comes from the ?service= query
// parameter and defaults to same-origin.

import { ChatClient } from "./client.js";
import { ChatController } from "./controller.js";

document.addEventListener("DOMContentLoaded", () => {
    const baseUrl = new URLSearchParams(window.location.search).get("service") ?? "";
    const client = new ChatClient(baseUrl);

    const input = document.getElementById("chat-input") as HTMLInputElement;
    const sendButton = document.getElementById("send-button") as HTMLButtonElement;
    const transcriptContainer = document.getElementById("transcript") as HTMLElement;
    const form = document.getElementById("chat-form") as HTMLFormElement;
    const status = document.getElementById("service-status") as HTMLElement;

    const controller = new ChatController(client, { input, sendButton, transcriptContainer });

    form.addEventListener("submit", (event) => {
        event.preventDefault();
        void controller.submit();
    });

    void client.healthy().then((ok) => {
        status.textContent = ok
            ? ""
            : `service unreachable at ${client.baseUrl || "this origin"}; is it running?`;
    });

    input.focus();
});
