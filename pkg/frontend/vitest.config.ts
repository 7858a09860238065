import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "node",
    include: ["tests/**/*.test.ts"],
    // the integration test spawns the Python service and runs real scans
    testTimeout: 120_000,
    hookTimeout: 60_000,
  },
});
