// Scoring mode: exactly the five published levels, no free entry, methods
// kept out of the markup, one score posted per result.

import { beforeEach, describe, expect, it } from "vitest";

import { StudyApi } from "../src/api.js";
import { MOS_LEVELS, MosScreen } from "../src/app.js";
import { MockService, installFetch } from "./mock_service.js";

function makeService(): MockService {
  return new MockService("img1", {
    candA: "fusion-based",
    candB: "histogram-prior",
    candC: "commercial-app",
  });
}

describe("scoring screen", () => {
  let root: HTMLElement;

  beforeEach(() => {
    document.body.innerHTML = "";
    root = document.createElement("div");
    document.body.appendChild(root);
  });

  it("exposes exactly five labeled options and nothing free-form", async () => {
    installFetch(makeService());
    const screen = new MosScreen(root, new StudyApi(), { imageId: "img1", raterId: "r0" });
    await screen.start();

    const options = [...root.querySelectorAll(".mos-option")];
    expect(options).toHaveLength(5);
    expect(options.map((b) => b.textContent)).toEqual([
      "Excellent (5)",
      "Good (4)",
      "Fair (3)",
      "Poor (2)",
      "Bad (1)",
    ]);
    expect(root.querySelectorAll("input, textarea, select")).toHaveLength(0);
    expect(MOS_LEVELS.map(([, s]) => s)).toEqual([5, 4, 3, 2, 1]);
  });

  it("posts the integer score for the hidden method and advances", async () => {
    const service = makeService();
    installFetch(service);
    const screen = new MosScreen(root, new StudyApi(), { imageId: "img1", raterId: "r7" });
    await screen.start();

    for (const name of Object.values(service.candidates)) {
      expect(document.body.innerHTML).not.toContain(name);
    }

    const good = [...root.querySelectorAll(".mos-option")].find(
      (b) => b.textContent === "Good (4)",
    ) as HTMLButtonElement;
    good.click();
    await screen.settled();
    expect(service.mos).toEqual([
      { image_id: "img1", rater_id: "r7", method: "fusion-based", score: 4 },
    ]);
    expect(root.querySelector(".progress")?.textContent).toBe("Result 2 of 3");

    ([...root.querySelectorAll(".mos-option")][4] as HTMLButtonElement).click();
    await screen.settled();
    expect(service.mos[1]).toEqual({
      image_id: "img1",
      rater_id: "r7",
      method: "histogram-prior",
      score: 1,
    });
  });

  it("finishes after the last result", async () => {
    const service = makeService();
    installFetch(service);
    let finished = false;
    const screen = new MosScreen(root, new StudyApi(), {
      imageId: "img1",
      raterId: "r0",
      onFinished: () => {
        finished = true;
      },
    });
    await screen.start();
    for (let i = 0; i < 3; i++) {
      (root.querySelector(".mos-option") as HTMLButtonElement).click();
      await screen.settled();
    }
    expect(finished).toBe(true);
    expect(service.mos).toHaveLength(3);
  });
});
