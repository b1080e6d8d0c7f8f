/** Image panes with one shared zoom/pan state.
 *
 * Every pane shows a different image but the same viewport: wheel zoom and
 * pointer drags on any pane move all of them together, so raters can
 * inspect the same region of the raw image and both candidates at once.
 * A pane whose image fails to load shows a retry control instead of dying.
 */

export interface Transform {
  scale: number;
  x: number;
  y: number;
}

const MIN_SCALE = 1;
const MAX_SCALE = 16;
const WHEEL_STEP = 1.25;

export class SyncViewer {
  private transform: Transform = { scale: 1, x: 0, y: 0 };
  private images: HTMLImageElement[] = [];
  private dragging: { startX: number; startY: number; baseX: number; baseY: number } | null =
    null;

  addPane(container: HTMLElement, src: string, caption: string): HTMLElement {
    const pane = document.createElement("figure");
    pane.className = "pane";

    const frame = document.createElement("div");
    frame.className = "pane-frame";
    const img = document.createElement("img");
    img.src = src;
    img.alt = caption;
    img.draggable = false;
    frame.appendChild(img);

    img.addEventListener("error", () => {
      if (frame.querySelector(".retry")) return;
      const retry = document.createElement("button");
      retry.className = "retry";
      retry.textContent = "Image failed to load - retry";
      retry.addEventListener("click", () => {
        retry.remove();
        const source = img.src;
        img.src = "";
        img.src = source;
      });
      frame.appendChild(retry);
    });

    const label = document.createElement("figcaption");
    label.textContent = caption;

    pane.appendChild(frame);
    pane.appendChild(label);
    container.appendChild(pane);

    frame.addEventListener("wheel", (e: WheelEvent) => {
      e.preventDefault();
      this.zoomBy(e.deltaY < 0 ? WHEEL_STEP : 1 / WHEEL_STEP);
    });
    frame.addEventListener("pointerdown", (e: PointerEvent) => {
      this.dragging = {
        startX: e.clientX,
        startY: e.clientY,
        baseX: this.transform.x,
        baseY: this.transform.y,
      };
    });
    frame.addEventListener("pointermove", (e: PointerEvent) => {
      if (!this.dragging) return;
      this.transform.x = this.dragging.baseX + (e.clientX - this.dragging.startX);
      this.transform.y = this.dragging.baseY + (e.clientY - this.dragging.startY);
      this.apply();
    });
    frame.addEventListener("pointerup", () => {
      this.dragging = null;
    });

    this.images.push(img);
    this.apply();
    return pane;
  }

  zoomBy(factor: number): void {
    const next = Math.min(MAX_SCALE, Math.max(MIN_SCALE, this.transform.scale * factor));
    this.transform.scale = next;
    if (next === MIN_SCALE) {
      this.transform.x = 0;
      this.transform.y = 0;
    }
    this.apply();
  }

  reset(): void {
    this.transform = { scale: 1, x: 0, y: 0 };
    this.apply();
  }

  getTransform(): Transform {
    return { ...this.transform };
  }

  transformsInSync(): boolean {
    const want = this.cssTransform();
    return this.images.every((img) => img.style.transform === want);
  }

  private cssTransform(): string {
    const { scale, x, y } = this.transform;
    return `translate(${x}px, ${y}px) scale(${scale})`;
  }

  private apply(): void {
    const css = this.cssTransform();
    for (const img of this.images) {
      img.style.transform = css;
    }
  }
}
