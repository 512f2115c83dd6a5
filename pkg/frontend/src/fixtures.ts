// The bundled demo matrices for the sandbox: the same club/restaurant/
// festival scenario at three cross-gain levels. Only the raw matrices
// live here; utilities and winners always come from the service.

import type { MatrixDoc } from "./api.js";

const labels = {
  H: "Hank's (live music club)",
  R: "Local restaurant",
  F: "Music festival",
};

export const SANDBOX_FIXTURES: Record<string, MatrixDoc> = {
  "strong festival gain": {
    catalog: ["H", "R", "F"],
    labels,
    entries: [
      [5, 0, 15],
      [0, 10, 0],
      [0, 0, 7],
    ],
  },
  "weak festival gain": {
    catalog: ["H", "R", "F"],
    labels,
    entries: [
      [5, 0, 3],
      [0, 10, 0],
      [0, 0, 7],
    ],
  },
  "festival wins itself": {
    catalog: ["H", "R", "F"],
    labels,
    entries: [
      [5, 0, 15],
      [0, 10, 0],
      [0, 0, 30],
    ],
  },
};
