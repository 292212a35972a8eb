import { defineConfig } from "vitest/config";

export default defineConfig({
  server: {
    // forward API calls to a locally running `contestkit serve`
    proxy: {
      "/cases": "http://127.0.0.1:8000",
    },
  },
  test: {
    environment: "jsdom",
  },
});
