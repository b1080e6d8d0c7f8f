/** Image panes with one shared zoom/pan state.
 *
 * Every pane shows a different image but the same viewport: wheel zoom and
 * pointer drags on any pane move all of them together, so raters can
 * inspect the same region of the raw image and both candidates at once.
 * A pane whose image fails to load shows a retry control instead of dying.
 */
const MIN_SCALE = 1;
const MAX_SCALE = 16;
const WHEEL_STEP = 1.25;
export class SyncViewer {
    constructor() {
        this.transform = { scale: 1, x: 0, y: 0 };
        this.images = [];
        this.dragging = null;
    }
    addPane(container, src, caption) {
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
            if (frame.querySelector(".retry"))
                return;
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
        frame.addEventListener("wheel", (e) => {
            e.preventDefault();
            this.zoomBy(e.deltaY < 0 ? WHEEL_STEP : 1 / WHEEL_STEP);
        });
        frame.addEventListener("pointerdown", (e) => {
            this.dragging = {
                startX: e.clientX,
                startY: e.clientY,
                baseX: this.transform.x,
                baseY: this.transform.y,
            };
        });
        frame.addEventListener("pointermove", (e) => {
            if (!this.dragging)
                return;
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
    zoomBy(factor) {
        const next = Math.min(MAX_SCALE, Math.max(MIN_SCALE, this.transform.scale * factor));
        this.transform.scale = next;
        if (next === MIN_SCALE) {
            this.transform.x = 0;
            this.transform.y = 0;
        }
        this.apply();
    }
    reset() {
        this.transform = { scale: 1, x: 0, y: 0 };
        this.apply();
    }
    getTransform() {
        return { ...this.transform };
    }
    transformsInSync() {
        const want = this.cssTransform();
        return this.images.every((img) => img.style.transform === want);
    }
    cssTransform() {
        const { scale, x, y } = this.transform;
        return `translate(${x}px, ${y}px) scale(${scale})`;
    }
    apply() {
        const css = this.cssTransform();
        for (const img of this.images) {
            img.style.transform = css;
        }
    }
}
