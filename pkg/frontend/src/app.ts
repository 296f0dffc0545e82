// Session console: one active session, no optimistic updates. Every
// transition waits for the server's answer before the screen changes, and
// label toggles are the only local state.

import {
  ApiError,
  FinalReport,
  InstanceMeta,
  Rule,
  SampleItem,
  SessionState,
  WorkbenchClient,
} from "./api.js";
import {
  LabelValue,
  renderFinalReport,
  renderNotice,
  renderRules,
  renderSampleGrid,
  renderTimelines,
} from "./views.js";

type Phase = "idle" | "labeling" | "choosing" | "done" | "empty" | "error";

export class Console {
  private meta: InstanceMeta | null = null;
  private session: SessionState | null = null;
  private sample: SampleItem[] = [];
  private rules: Rule[] = [];
  private labels = new Map<string, LabelValue>();
  private selectedRule: string | null = null;
  private phase: Phase = "idle";
  private busy = false;
  private lastError = "";
  private report: FinalReport | null = null;

  constructor(
    private readonly root: HTMLElement,
    private readonly client: WorkbenchClient,
  ) {}

  state(): Phase {
    return this.phase;
  }

  async start(formulation: string): Promise<void> {
    await this.guarded(async () => {
      this.meta = (await this.client.instance()).meta;
      const session = await this.client.createSession(formulation);
      this.session = session;
      if (session.state === "empty_region") {
        this.phase = "empty";
        return;
      }
      this.acceptSample(session.sample ?? []);
    });
  }

  toggleLabel(id: string, value: "good" | "other"): void {
    if (this.phase !== "labeling" || this.busy) {
      return;
    }
    // a second click on the same label clears it back to unlabeled
    this.labels.set(id, this.labels.get(id) === value ? "unlabeled" : value);
    this.render();
  }

  async submitLabels(): Promise<void> {
    if (this.phase !== "labeling") {
      return;
    }
    const chosen: Record<string, "good" | "other"> = {};
    for (const [id, value] of this.labels) {
      if (value !== "unlabeled") {
        chosen[id] = value;
      }
    }
    if (!Object.values(chosen).includes("good")) {
      this.lastError = "mark at least one strategy good before submitting";
      this.render();
      return;
    }
    await this.guarded(async () => {
      const res = await this.client.submitLabels(this.session!.id, chosen);
      this.rules = res.rules;
      this.selectedRule = null;
      this.phase = "choosing";
    });
  }

  selectRule(id: string): void {
    if (this.phase === "choosing" && !this.busy) {
      this.selectedRule = id;
      this.render();
    }
  }

  async chooseSelectedRule(): Promise<void> {
    if (this.phase !== "choosing" || this.selectedRule === null) {
      return;
    }
    const rule = this.selectedRule;
    await this.guarded(async () => {
      const res = await this.client.chooseRule(this.session!.id, rule);
      if (res.state === "empty_region") {
        this.phase = "empty";
        return;
      }
      this.acceptSample(res.sample ?? []);
    });
  }

  async markSatisfied(id: string): Promise<void> {
    if (this.phase !== "labeling" && this.phase !== "choosing") {
      return;
    }
    await this.guarded(async () => {
      this.report = await this.client.markSatisfied(this.session!.id, id);
      this.phase = "done";
    });
  }

  private acceptSample(sample: SampleItem[]): void {
    this.sample = sample;
    this.labels = new Map(sample.map((item) => [item.id, "unlabeled" as LabelValue]));
    this.rules = [];
    this.selectedRule = null;
    this.phase = "labeling";
  }

  private async guarded(action: () => Promise<void>): Promise<void> {
    if (this.busy) {
      return;
    }
    this.busy = true;
    this.lastError = "";
    this.render();
    try {
      await action();
    } catch (err) {
      if (err instanceof ApiError) {
        this.lastError = `${err.body.code}: ${err.body.message}`;
      } else {
        this.lastError = `network failure: ${String(err)} - retry when the `
          + "backend is reachable";
        if (this.phase === "idle") {
          this.phase = "error";
        }
      }
    } finally {
      this.busy = false;
      this.render();
    }
  }

  render(): void {
    this.root.replaceChildren();
    if (this.lastError) {
      this.root.append(renderNotice("error", this.lastError));
    }
    if (this.busy) {
      this.root.append(renderNotice("busy", "waiting for the server"));
    }
    switch (this.phase) {
      case "idle":
      case "error":
        this.root.append(renderNotice("idle", "start a session to begin"));
        return;
      case "empty":
        this.root.append(renderNotice(
          "empty",
          "the accumulated constraints exclude every feasible strategy; "
          + "the session is over",
        ));
        return;
      case "done":
        if (this.report) {
          this.root.append(renderFinalReport(this.report));
        }
        return;
      case "labeling":
      case "choosing":
        break;
    }
    const session = this.session!;
    this.root.append(renderNotice(
      "iteration", `iteration ${session.iteration} (${session.formulation})`));
    this.root.append(renderSampleGrid(
      session.objective_names, this.sample, this.labels,
      (id, value) => this.toggleLabel(id, value)));
    if (this.meta) {
      this.root.append(renderTimelines(this.meta, this.sample));
    }
    if (this.phase === "labeling") {
      const submit = document.createElement("button");
      submit.setAttribute("data-testid", "submit-labels");
      submit.textContent = "submit labels";
      submit.disabled = this.busy;
      submit.addEventListener("click", () => void this.submitLabels());
      this.root.append(submit);
    }
    if (this.phase === "choosing") {
      this.root.append(renderRules(this.rules, this.selectedRule,
        (id) => this.selectRule(id)));
      const choose = document.createElement("button");
      choose.setAttribute("data-testid", "choose-rule");
      choose.textContent = "add the selected rule";
      choose.disabled = this.busy || this.selectedRule === null;
      choose.addEventListener("click", () => void this.chooseSelectedRule());
      this.root.append(choose);
    }
    for (const item of this.sample) {
      const done = document.createElement("button");
      done.setAttribute("data-testid", `satisfied-${item.id}`);
      done.textContent = `satisfied with ${item.id}`;
      done.disabled = this.busy;
      done.addEventListener("click", () => void this.markSatisfied(item.id));
      this.root.append(done);
    }
  }
}

export function mount(root: HTMLElement, base: string): Console {
  return new Console(root, new WorkbenchClient(base));
}
