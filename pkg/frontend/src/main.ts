/** Entry point: route by query parameters.
 *
 *   ?image=img1&rater=r7             tournament mode
 *   ?image=img1&rater=r7&mode=mos    1-5 scoring mode
 *
 * Without parameters a small start form lists the study's images.
 */

import { StudyApi } from "./api.js";
import { MosScreen, TournamentScreen } from "./app.js";

const api = new StudyApi("");

function startForm(root: HTMLElement): void {
  const h = document.createElement("h2");
  h.textContent = "Start a session";
  const form = document.createElement("form");
  form.innerHTML = `
    <label>Rater id <input name="rater" required></label>
    <label>Image <select name="image"></select></label>
    <label>Mode
      <select name="mode">
        <option value="tournament">pairwise comparison</option>
        <option value="mos">score results 1-5</option>
      </select>
    </label>
    <button type="submit">Begin</button>`;
  root.replaceChildren(h, form);

  fetch("/images")
    .then((r) => r.json())
    .then((images: { image_id: string }[]) => {
      const select = form.querySelector("select[name=image]") as HTMLSelectElement;
      for (const image of images) {
        const option = document.createElement("option");
        option.value = image.image_id;
        option.textContent = image.image_id;
        select.appendChild(option);
      }
    });

  form.addEventListener("submit", (e) => {
    e.preventDefault();
    const data = new FormData(form);
    const params = new URLSearchParams({
      image: String(data.get("image")),
      rater: String(data.get("rater")),
      mode: String(data.get("mode")),
    });
    window.location.search = params.toString();
  });
}

export function boot(root: HTMLElement, search: string): void {
  const params = new URLSearchParams(search);
  const imageId = params.get("image");
  const raterId = params.get("rater");
  if (!imageId || !raterId) {
    startForm(root);
    return;
  }
  if (params.get("mode") === "mos") {
    new MosScreen(root, api, { imageId, raterId }).start();
  } else {
    new TournamentScreen(root, api, { imageId, raterId }).start();
  }
}

const root = document.getElementById("app");
if (root) {
  boot(root, window.location.search);
}
