import { defineConfig } from 'vitest/config'

export default defineConfig({
  define: { __TEST__: 'true' },
  test: {
    environment: 'happy-dom',
    globals: true,
    include: ['test/**/*.test.ts'],
  },
})
