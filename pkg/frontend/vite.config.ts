import { defineConfig } from "vitest/config";

// Dev and preview servers proxy API calls to a locally running engine
// service (`fairsteer serve`, default 127.0.0.1:8765) so the app can be
// served from vite while talking to the real backend.
const API = "http://127.0.0.1:8765";
const proxy = {
  "/sessions": API,
  "/jobs": API,
};

export default defineConfig({
  server: { proxy },
  preview: { proxy },
  build: {
    outDir: "dist",
  },
  test: {
    environment: "jsdom",
    include: ["tests/**/*.test.ts"],
  },
});
