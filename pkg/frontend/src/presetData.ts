/** GENERATED by scripts/capture-fixtures.mjs from a live service's
GET /api/scenarios; do not edit by hand. Regenerate with `npm run fixtures`. */

import type { ScenarioEntry } from "./types.js";

export const PRESET_SCENARIOS: ScenarioEntry[] = [
  {
    "source": "preset",
    "schema_version": 1,
    "name": "baseline",
    "distributions": {
      "x1": [
        0.03,
        0.02,
        0.06,
        0.08,
        0.09,
        0.1,
        0.1,
        0.1,
        0.09,
        0.07,
        0.06,
        0.05,
        0.045,
        0.035,
        0.03,
        0.02,
        0.02
      ],
      "x2": [
        0.75,
        0.25
      ],
      "x3": [
        0.7,
        0.3
      ],
      "x4": [
        0.05,
        0.09,
        0.09,
        0.27,
        0.27,
        0.23
      ],
      "x5": [
        0.96,
        0.02,
        0.012,
        0.008
      ],
      "x6": [
        0.85,
        0.15
      ],
      "x7": [
        0.88,
        0.12
      ],
      "x8": [
        0.8,
        0.2
      ],
      "x9": [
        0.873,
        0.127
      ]
    }
  },
  {
    "source": "preset",
    "schema_version": 1,
    "name": "S1",
    "distributions": {
      "x1": [
        0.3924943820224719,
        0.2616629213483146,
        0.021842696629213492,
        0.029123595505617987,
        0.032764044943820236,
        0.036404494382022486,
        0.036404494382022486,
        0.036404494382022486,
        0.032764044943820236,
        0.02548314606741574,
        0.021842696629213492,
        0.018202247191011243,
        0.016382022471910118,
        0.01274157303370787,
        0.010921348314606746,
        0.007280898876404497,
        0.007280898876404497
      ],
      "x2": [
        0.75,
        0.25
      ],
      "x3": [
        0.7,
        0.3
      ],
      "x4": [
        0.05,
        0.09,
        0.09,
        0.27,
        0.27,
        0.23
      ],
      "x5": [
        0.96,
        0.02,
        0.012,
        0.008
      ],
      "x6": [
        0.85,
        0.15
      ],
      "x7": [
        0.88,
        0.12
      ],
      "x8": [
        0.8,
        0.2
      ],
      "x9": [
        0.873,
        0.127
      ]
    }
  },
  {
    "source": "preset",
    "schema_version": 1,
    "name": "S2",
    "distributions": {
      "x1": [
        0.008230769230769224,
        0.0054871794871794825,
        0.016461538461538448,
        0.02194871794871793,
        0.024692307692307673,
        0.027435897435897416,
        0.027435897435897416,
        0.027435897435897416,
        0.024692307692307673,
        0.019205128205128194,
        0.016461538461538448,
        0.19512820512820522,
        0.17561538461538465,
        0.13658974358974366,
        0.11707692307692309,
        0.07805128205128208,
        0.07805128205128208
      ],
      "x2": [
        0.75,
        0.25
      ],
      "x3": [
        0.7,
        0.3
      ],
      "x4": [
        0.05,
        0.09,
        0.09,
        0.27,
        0.27,
        0.23
      ],
      "x5": [
        0.96,
        0.02,
        0.012,
        0.008
      ],
      "x6": [
        0.85,
        0.15
      ],
      "x7": [
        0.88,
        0.12
      ],
      "x8": [
        0.8,
        0.2
      ],
      "x9": [
        0.873,
        0.127
      ]
    }
  },
  {
    "source": "preset",
    "schema_version": 1,
    "name": "S3",
    "distributions": {
      "x1": [
        0.03,
        0.02,
        0.06,
        0.08,
        0.09,
        0.1,
        0.1,
        0.1,
        0.09,
        0.07,
        0.06,
        0.05,
        0.045,
        0.035,
        0.03,
        0.02,
        0.02
      ],
      "x2": [
        0.75,
        0.25
      ],
      "x3": [
        0.7,
        0.3
      ],
      "x4": [
        0.525,
        0.045,
        0.045,
        0.135,
        0.135,
        0.115
      ],
      "x5": [
        0.96,
        0.02,
        0.012,
        0.008
      ],
      "x6": [
        0.85,
        0.15
      ],
      "x7": [
        0.88,
        0.12
      ],
      "x8": [
        0.8,
        0.2
      ],
      "x9": [
        0.873,
        0.127
      ]
    }
  }
];
