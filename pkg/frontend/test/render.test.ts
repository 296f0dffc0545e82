// View-layer tests on fixed payloads: no backend, no recomputation.
import { describe, expect, it } from "vitest";

import type { FinalReport, InstanceMeta, Rule, SampleItem } from "../src/api.js";
import {
  renderFinalReport,
  renderRules,
  renderSampleGrid,
  renderTimelines,
} from "../src/views.js";

const META: InstanceMeta = {
  facilities: ["School", "Depot"],
  locations: ["North", "South"],
  criteria: ["Economic"],
  horizon: 3,
  interest_rate: 0.1,
};

const SAMPLE: SampleItem[] = [
  {
    id: "ST1",
    vector: [3, 0.5000000000000001],
    activations: [{ facility: "School", location: "North", period: 1 }],
  },
  {
    id: "ST2",
    vector: [1, 2],
    activations: [
      { facility: "School", location: "South", period: 0 },
      { facility: "Depot", location: "North", period: 2 },
    ],
  },
];

const RULES: Rule[] = [
  {
    id: "R1",
    conditions: [{ objective: "F1,South", objective_index: 1, threshold: 12 }],
    support: ["ST2", "ST4"],
    sentence: "if F1,South >= 12, then the strategy is good",
  },
];

describe("sample grid", () => {
  it("shows payload numbers verbatim, including float noise", () => {
    const labels = new Map();
    const grid = renderSampleGrid(["F1,North", "F1,South"], SAMPLE, labels, () => {});
    const cell = grid.querySelector('[data-testid="cell-ST1-1"]');
    expect(cell?.textContent).toBe("0.5000000000000001");
    expect(cell?.getAttribute("data-value")).toBe(String(SAMPLE[0].vector[1]));
  });

  it("renders identically for the same payload (replay gives the same screen)", () => {
    const a = renderSampleGrid(["a", "b"], SAMPLE, new Map(), () => {});
    const b = renderSampleGrid(["a", "b"], SAMPLE, new Map(), () => {});
    expect(a.outerHTML).toBe(b.outerHTML);
  });

  it("toggle buttons report pressed state from the labels map", () => {
    const labels = new Map([["ST1", "good" as const]]);
    const grid = renderSampleGrid(["a", "b"], SAMPLE, labels, () => {});
    expect(grid.querySelector('[data-testid="label-ST1-good"]')
      ?.getAttribute("aria-pressed")).toBe("true");
    expect(grid.querySelector('[data-testid="label-ST2-good"]')
      ?.getAttribute("aria-pressed")).toBe("false");
  });
});

describe("timelines", () => {
  it("marks exactly the activation cells with the location name", () => {
    const view = renderTimelines(META, SAMPLE);
    expect(view.querySelector('[data-testid="tl-ST1-School-1"]')?.textContent)
      .toBe("North");
    expect(view.querySelector('[data-testid="tl-ST1-School-0"]')?.textContent).toBe("");
    expect(view.querySelector('[data-testid="tl-ST2-Depot-2"]')?.textContent)
      .toBe("North");
  });
});

describe("rules", () => {
  it("shows the server sentence and support verbatim, in order", () => {
    const view = renderRules(RULES, null, () => {});
    const item = view.querySelector('[data-testid="rule-R1"]');
    expect(item?.querySelector(".sentence")?.textContent).toBe(RULES[0].sentence);
    expect(item?.querySelector(".support")?.textContent).toBe(" (ST2, ST4)");
  });
});

describe("final report", () => {
  const report: FinalReport = {
    state: "satisfied",
    strategy: [{ facility: "School", location: "North", period: 2 }],
    value: 123.45600000000002,
    dashboard: [
      {
        name: "by_location_period_discounted",
        header: ["location", "period", "value"],
        rows: [["North", 1, 69.3], ["North", 2, 91.07], ["South", 1, 7.5]],
      },
      {
        name: "by_period_discounted",
        header: ["period", "value"],
        rows: [[1, 76.8], [2, 98.57]],
      },
    ],
  };

  it("prints the overall value byte-for-byte and one legend entry per row", () => {
    const view = renderFinalReport(report);
    expect(view.querySelector('[data-testid="final-value"]')?.textContent)
      .toBe("overall discounted value: 123.45600000000002");
    const chart = view.querySelector('[data-testid="chart-by_location_period_discounted"]');
    expect(chart).not.toBeNull();
    const legend = [...chart!.querySelectorAll(".legend li")].map((li) => li.textContent);
    expect(legend).toContain("location=North period=1: 69.3");
    const bars = chart!.querySelectorAll("rect");
    expect(bars.length).toBe(3);
    expect([...bars].map((b) => b.getAttribute("data-value"))).toContain("91.07");
  });
});
