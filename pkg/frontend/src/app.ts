/** Screens for the rater study.
 *
 * The tournament screen shows the original image between the two candidate
 * results, all three in synchronized zoom panes, and walks the rater
 * through the winner-stays comparisons until the service asks for the
 * satisfaction label. The comparison is blind: the markup never names the
 * method behind a candidate, and each pair lands on a random side of the
 * screen to cancel position bias. The scoring screen offers exactly the
 * five published opinion levels as buttons, nothing free-form.
 *
 * All protocol state lives in the service; these screens only hold the
 * view the service last returned, so a page refresh resumes mid-session.
 */

import { StudyApi, TournamentView, CandidateInfo } from "./api.js";
import { SyncViewer } from "./viewer.js";

export const MOS_LEVELS: ReadonlyArray<readonly [string, number]> = [
  ["Excellent", 5],
  ["Good", 4],
  ["Fair", 3],
  ["Poor", 2],
  ["Bad", 1],
];

export interface TournamentOptions {
  imageId: string;
  raterId: string;
  /** Source of randomness for the left/right coin flip; injectable for tests. */
  rng?: () => number;
  onClosed?: (view: TournamentView) => void;
}

function button(label: string, className: string): HTMLButtonElement {
  const b = document.createElement("button");
  b.textContent = label;
  b.className = className;
  return b;
}

function heading(root: HTMLElement, text: string): void {
  const h = document.createElement("h2");
  h.textContent = text;
  root.appendChild(h);
}

export class TournamentScreen {
  private pending: Promise<void> = Promise.resolve();
  viewer: SyncViewer | null = null;

  constructor(
    private root: HTMLElement,
    private api: StudyApi,
    private opts: TournamentOptions,
  ) {}

  start(): Promise<void> {
    this.pending = this.api
      .startTournament(this.opts.imageId, this.opts.raterId)
      .then((view) => this.render(view));
    return this.pending;
  }

  /** Resolves once the current transition (if any) has rendered. */
  settled(): Promise<void> {
    return this.pending;
  }

  private render(view: TournamentView): void {
    this.root.replaceChildren();
    if (view.pair !== null) {
      this.renderPair(view);
    } else if (view.needs_satisfaction) {
      this.renderSatisfaction(view);
    } else {
      this.renderClosed(view);
    }
  }

  private renderPair(view: TournamentView): void {
    const pair = view.pair as [string, string];
    const urls = view.pair_urls as [string, string];
    heading(this.root, "Which result looks better?");

    const progress = document.createElement("p");
    progress.className = "progress";
    progress.textContent = `${view.comparisons_done + 1}/${view.comparisons_total}`;
    this.root.appendChild(progress);

    // Random side assignment per pair; the protocol order never shows.
    const flip = (this.opts.rng ?? Math.random)() < 0.5;
    const leftIndex = flip ? 1 : 0;
    const leftCandidate = pair[leftIndex];
    const rightCandidate = pair[1 - leftIndex];

    const row = document.createElement("div");
    row.className = "pane-row";
    this.viewer = new SyncViewer();
    this.viewer.addPane(row, this.api.url(urls[leftIndex]), "Left");
    this.viewer.addPane(row, this.api.url(view.raw_url), "Original");
    this.viewer.addPane(row, this.api.url(urls[1 - leftIndex]), "Right");
    this.root.appendChild(row);

    const controls = document.createElement("div");
    controls.className = "controls";
    const chooseLeft = button("Left is better", "choose choose-left");
    const chooseRight = button("Right is better", "choose choose-right");
    const resetZoom = button("Reset zoom", "reset-zoom");
    resetZoom.addEventListener("click", () => this.viewer?.reset());

    const submit = (candidate: string) => {
      chooseLeft.disabled = true; // one choice per pair
      chooseRight.disabled = true;
      this.pending = this.api
        .submitChoice(view.tournament_id, candidate, view.comparisons_done)
        .then((next) => this.render(next));
    };
    chooseLeft.addEventListener("click", () => submit(leftCandidate));
    chooseRight.addEventListener("click", () => submit(rightCandidate));

    controls.append(chooseLeft, resetZoom, chooseRight);
    this.root.appendChild(controls);
  }

  private renderSatisfaction(view: TournamentView): void {
    heading(this.root, "Inspect your best result once more");

    const row = document.createElement("div");
    row.className = "pane-row";
    this.viewer = new SyncViewer();
    this.viewer.addPane(row, this.api.url(view.raw_url), "Original");
    this.viewer.addPane(row, this.api.url(`/results/${view.final_pick}`), "Your pick");
    this.root.appendChild(row);

    const prompt = document.createElement("p");
    prompt.className = "satisfaction-prompt";
    prompt.textContent = "Are you satisfied with this result?";
    this.root.appendChild(prompt);

    const controls = document.createElement("div");
    controls.className = "controls";
    for (const label of ["satisfied", "dissatisfied"] as const) {
      const b = button(label === "satisfied" ? "Satisfied" : "Dissatisfied", `label-${label}`);
      b.addEventListener("click", () => {
        controls.querySelectorAll("button").forEach((x) => ((x as HTMLButtonElement).disabled = true));
        this.pending = this.api
          .submitSatisfaction(view.tournament_id, label)
          .then((next) => this.render(next));
      });
      controls.appendChild(b);
    }
    this.root.appendChild(controls);
  }

  private renderClosed(view: TournamentView): void {
    heading(this.root, "All done");
    const p = document.createElement("p");
    p.className = "closed-summary";
    p.textContent = `Thanks! You finished ${view.comparisons_done} comparisons for this image.`;
    this.root.appendChild(p);
    this.opts.onClosed?.(view);
  }
}

export interface MosOptions {
  imageId: string;
  raterId: string;
  onFinished?: () => void;
}

export class MosScreen {
  private candidates: CandidateInfo[] = [];
  private index = 0;
  private pending: Promise<void> = Promise.resolve();

  constructor(
    private root: HTMLElement,
    private api: StudyApi,
    private opts: MosOptions,
  ) {}

  start(): Promise<void> {
    this.pending = this.api.listCandidates(this.opts.imageId).then((candidates) => {
      this.candidates = candidates;
      this.index = 0;
      this.render();
    });
    return this.pending;
  }

  settled(): Promise<void> {
    return this.pending;
  }

  private render(): void {
    this.root.replaceChildren();
    if (this.index >= this.candidates.length) {
      heading(this.root, "All results scored");
      this.opts.onFinished?.();
      return;
    }
    const current = this.candidates[this.index];
    heading(this.root, "Rate this result");

    const progress = document.createElement("p");
    progress.className = "progress";
    progress.textContent = `Result ${this.index + 1} of ${this.candidates.length}`;
    this.root.appendChild(progress);

    const row = document.createElement("div");
    row.className = "pane-row";
    const viewer = new SyncViewer();
    viewer.addPane(row, this.api.url(`/images/${this.opts.imageId}/raw`), "Original");
    viewer.addPane(row, this.api.url(current.url), "Result");
    this.root.appendChild(row);

    const controls = document.createElement("div");
    controls.className = "controls mos-options";
    for (const [label, score] of MOS_LEVELS) {
      const b = button(`${label} (${score})`, "mos-option");
      b.addEventListener("click", () => {
        controls.querySelectorAll("button").forEach((x) => ((x as HTMLButtonElement).disabled = true));
        // The method name stays in memory; it is never rendered.
        this.pending = this.api
          .submitMos(this.opts.imageId, this.opts.raterId, current.method, score)
          .then(() => {
            this.index += 1;
            this.render();
          });
      });
      controls.appendChild(b);
    }
    this.root.appendChild(controls);
  }
}
