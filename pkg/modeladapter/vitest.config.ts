import { defineConfig } from 'vitest/config';

export default defineConfig({
  test: {
    include: ['test/**/*.test.ts'],
    testTimeout: 180_000,
    hookTimeout: 60_000,
    // adapter tests share one temp workspace; keep them on a single worker
    pool: 'forks',
    maxWorkers: 1,
    minWorkers: 1,
    sequence: { concurrent: false },
  },
});
