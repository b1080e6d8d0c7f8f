// Shared-viewport behavior: zoom and pan hit every pane identically, and a
// broken image offers a retry control.

import { beforeEach, describe, expect, it } from "vitest";

import { SyncViewer } from "../src/viewer.js";

describe("synchronized viewer", () => {
  let container: HTMLElement;

  beforeEach(() => {
    document.body.innerHTML = "";
    container = document.createElement("div");
    document.body.appendChild(container);
  });

  it("applies one transform to all panes", () => {
    const viewer = new SyncViewer();
    viewer.addPane(container, "/results/a", "Left");
    viewer.addPane(container, "/images/x/raw", "Original");
    viewer.addPane(container, "/results/b", "Right");

    viewer.zoomBy(2);
    expect(viewer.getTransform().scale).toBe(2);
    expect(viewer.transformsInSync()).toBe(true);

    const imgs = [...container.querySelectorAll("img")];
    const unique = new Set(imgs.map((img) => img.style.transform));
    expect(unique.size).toBe(1);
    expect([...unique][0]).toContain("scale(2)");
  });

  it("routes wheel zoom from any pane to the shared state", () => {
    const viewer = new SyncViewer();
    viewer.addPane(container, "/results/a", "Left");
    viewer.addPane(container, "/results/b", "Right");
    const frames = container.querySelectorAll(".pane-frame");
    frames[1].dispatchEvent(new WheelEvent("wheel", { deltaY: -120, cancelable: true }));
    expect(viewer.getTransform().scale).toBeCloseTo(1.25);
    expect(viewer.transformsInSync()).toBe(true);
  });

  it("never zooms out beyond the fitted view", () => {
    const viewer = new SyncViewer();
    viewer.addPane(container, "/results/a", "Left");
    viewer.zoomBy(0.25);
    expect(viewer.getTransform().scale).toBe(1);
  });

  it("reset returns to the fitted view", () => {
    const viewer = new SyncViewer();
    viewer.addPane(container, "/results/a", "Left");
    viewer.zoomBy(4);
    viewer.reset();
    expect(viewer.getTransform()).toEqual({ scale: 1, x: 0, y: 0 });
  });

  it("offers a retry control when an image fails to load", () => {
    const viewer = new SyncViewer();
    const pane = viewer.addPane(container, "/results/missing", "Left");
    const img = pane.querySelector("img") as HTMLImageElement;
    img.dispatchEvent(new Event("error"));
    const retry = pane.querySelector(".retry") as HTMLButtonElement;
    expect(retry).not.toBeNull();
    expect(retry.textContent).toContain("retry");
    retry.click();
    expect(pane.querySelector(".retry")).toBeNull();
    expect(img.getAttribute("src")).toContain("/results/missing");
  });
});
