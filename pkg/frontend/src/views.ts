// Pure DOM builders. Every number shown on screen is the String() of a value
// taken verbatim from an API payload; nothing is recomputed client-side.

import type {
  Activation,
  DashboardTable,
  FinalReport,
  InstanceMeta,
  Rule,
  SampleItem,
} from "./api.js";

export type LabelValue = "good" | "other" | "unlabeled";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, value);
  }
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}

export function renderSampleGrid(
  objectiveNames: string[],
  sample: SampleItem[],
  labels: Map<string, LabelValue>,
  onToggle: (id: string, value: "good" | "other") => void,
): HTMLElement {
  const wrap = el("section", { class: "sample", "data-testid": "sample-grid" });
  const table = el("table");
  const head = el("tr");
  head.append(el("th", {}, "strategy"));
  for (const name of objectiveNames) {
    head.append(el("th", {}, name));
  }
  head.append(el("th", {}, "label"));
  table.append(head);
  for (const item of sample) {
    const row = el("tr", { "data-testid": `row-${item.id}` });
    row.append(el("th", {}, item.id));
    item.vector.forEach((value, k) => {
      row.append(el("td", {
        class: "num",
        "data-testid": `cell-${item.id}-${k}`,
        "data-value": String(value),
      }, String(value)));
    });
    const cell = el("td");
    const state = labels.get(item.id) ?? "unlabeled";
    for (const value of ["good", "other"] as const) {
      const button = el("button", {
        "data-testid": `label-${item.id}-${value}`,
        "aria-pressed": String(state === value),
      }, value);
      button.addEventListener("click", () => onToggle(item.id, value));
      cell.append(button);
    }
    row.append(cell);
    table.append(row);
  }
  wrap.append(table);
  return wrap;
}

export function renderTimelines(
  meta: InstanceMeta,
  sample: SampleItem[],
): HTMLElement {
  const wrap = el("section", { class: "timelines", "data-testid": "timelines" });
  for (const item of sample) {
    const block = el("div", { "data-testid": `timeline-${item.id}` });
    block.append(el("h4", {}, item.id));
    const table = el("table");
    const head = el("tr");
    head.append(el("th", {}, "facility"));
    for (let t = 0; t < meta.horizon; t += 1) {
      head.append(el("th", {}, String(t)));
    }
    table.append(head);
    const byFacility = new Map<string, Activation>();
    for (const act of item.activations) {
      byFacility.set(act.facility, act);
    }
    for (const facility of meta.facilities) {
      const row = el("tr");
      row.append(el("th", {}, facility));
      const act = byFacility.get(facility);
      for (let t = 0; t < meta.horizon; t += 1) {
        const active = act !== undefined && act.period === t;
        row.append(el("td", {
          class: active ? "active" : "",
          "data-testid": `tl-${item.id}-${facility}-${t}`,
        }, active ? act.location : ""));
      }
      table.append(row);
    }
    block.append(table);
    wrap.append(block);
  }
  return wrap;
}

export function renderRules(
  rules: Rule[],
  selected: string | null,
  onSelect: (id: string) => void,
): HTMLElement {
  const wrap = el("section", { class: "rules", "data-testid": "rules" });
  wrap.append(el("h3", {}, "induced rules"));
  const list = el("ul");
  for (const rule of rules) {
    const item = el("li", { "data-testid": `rule-${rule.id}` });
    const radio = el("input", {
      type: "radio",
      name: "rule",
      "data-testid": `pick-${rule.id}`,
    }) as HTMLInputElement;
    radio.checked = selected === rule.id;
    radio.addEventListener("change", () => onSelect(rule.id));
    item.append(radio);
    item.append(el("span", { class: "sentence" }, rule.sentence));
    item.append(el("span", { class: "support" }, ` (${rule.support.join(", ")})`));
    list.append(item);
  }
  wrap.append(list);
  return wrap;
}

function tableByName(report: FinalReport, name: string): DashboardTable | undefined {
  return report.dashboard.find((t) => t.name === name);
}

// One stacked bar per period; segment heights are presentation, the numbers
// shown in the legend and titles are the payload values verbatim.
export function renderStackedBars(
  table: DashboardTable,
  groupColumn: string,
  title: string,
): HTMLElement {
  const wrap = el("div", { class: "chart", "data-testid": `chart-${table.name}` });
  wrap.append(el("h4", {}, title));
  const periodCol = table.header.indexOf("period");
  const valueCol = table.header.indexOf("value");
  const groupCol = table.header.indexOf(groupColumn);
  const periods = [...new Set(table.rows.map((r) => Number(r[periodCol])))].sort(
    (a, b) => a - b,
  );
  const groups = groupCol >= 0
    ? [...new Set(table.rows.map((r) => String(r[groupCol])))]
    : ["total"];
  const totals = new Map<number, number>();
  for (const row of table.rows) {
    const t = Number(row[periodCol]);
    totals.set(t, (totals.get(t) ?? 0) + Number(row[valueCol]));
  }
  const maxTotal = Math.max(1e-9, ...totals.values());
  const svgNS = "http://www.w3.org/2000/svg";
  const width = 64 * periods.length;
  const svg = document.createElementNS(svgNS, "svg");
  svg.setAttribute("viewBox", `0 0 ${width} 140`);
  svg.setAttribute("width", String(width));
  svg.setAttribute("height", "140");
  periods.forEach((t, col) => {
    let y = 120;
    groups.forEach((group, gi) => {
      const row = table.rows.find(
        (r) => Number(r[periodCol]) === t
          && (groupCol < 0 || String(r[groupCol]) === group),
      );
      if (!row) {
        return;
      }
      const value = Number(row[valueCol]);
      const h = (value / maxTotal) * 110;
      const rect = document.createElementNS(svgNS, "rect");
      rect.setAttribute("x", String(col * 64 + 8));
      rect.setAttribute("y", String(y - h));
      rect.setAttribute("width", "44");
      rect.setAttribute("height", String(h));
      rect.setAttribute("class", `seg seg-${gi}`);
      rect.setAttribute("data-value", String(row[valueCol]));
      const tip = document.createElementNS(svgNS, "title");
      tip.textContent = `${group} @ ${t}: ${String(row[valueCol])}`;
      rect.append(tip);
      svg.append(rect);
      y -= h;
    });
    const label = document.createElementNS(svgNS, "text");
    label.setAttribute("x", String(col * 64 + 30));
    label.setAttribute("y", "134");
    label.setAttribute("text-anchor", "middle");
    label.textContent = String(t);
    svg.append(label);
  });
  wrap.append(svg);
  const legend = el("ul", { class: "legend" });
  for (const row of table.rows) {
    const parts = table.header.slice(0, -1).map((h, k) => `${h}=${String(row[k])}`);
    legend.append(el("li", {
      class: "num",
      "data-value": String(row[valueCol]),
    }, `${parts.join(" ")}: ${String(row[valueCol])}`));
  }
  wrap.append(legend);
  return wrap;
}

export function renderFinalReport(report: FinalReport): HTMLElement {
  const wrap = el("section", { class: "report", "data-testid": "final-report" });
  wrap.append(el("h3", {}, "satisfactory strategy"));
  const table = el("table");
  const head = el("tr");
  for (const col of ["facility", "location", "period"]) {
    head.append(el("th", {}, col));
  }
  table.append(head);
  for (const act of report.strategy) {
    const row = el("tr", { "data-testid": `final-${act.facility}` });
    row.append(el("td", {}, act.facility));
    row.append(el("td", {}, act.location));
    row.append(el("td", { class: "num", "data-value": String(act.period) },
      String(act.period)));
    table.append(row);
  }
  wrap.append(table);
  wrap.append(el("p", {
    class: "num",
    "data-testid": "final-value",
    "data-value": String(report.value),
  }, `overall discounted value: ${String(report.value)}`));

  const charts: Array<[string, string, string]> = [
    ["by_location_period_discounted", "location", "performance by location over time"],
    ["by_criterion_period_discounted", "criterion", "performance by criterion over time"],
    ["by_facility_period_discounted", "facility", "performance by facility over time"],
    ["by_period_discounted", "", "overall performance over time"],
  ];
  for (const [name, group, title] of charts) {
    const data = tableByName(report, name);
    if (data) {
      wrap.append(renderStackedBars(data, group, title));
    }
  }
  return wrap;
}

export function renderNotice(kind: string, message: string): HTMLElement {
  return el("div", { class: `notice ${kind}`, "data-testid": `notice-${kind}` }, message);
}
