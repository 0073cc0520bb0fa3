import { defineConfig } from "vitest/config";

export default defineConfig({
    test: {
        environment: "jsdom",
        // the round-trip suite boots the real service, which takes a moment
        testTimeout: 60_000,
        hookTimeout: 60_000,
    },
});
