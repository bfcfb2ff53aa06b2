/** Single-page client: query upload, ranked result cards with feedback
 * buttons, and keyword browsing. Served statically by the retrieval
 * service, so all API paths are same-origin. */

import { ApiError, CbirClient, type CategoryInfo } from "./api.js";
import {
  cardsFromResponse,
  FeedbackGate,
  formatScore,
  type ResultCard,
} from "./state.js";

const client = new CbirClient("");
const gate = new FeedbackGate();

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) {
    node.className = className;
  }
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}

function byId<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

let banner: HTMLElement;

function showError(message: string): void {
  banner.textContent = message;
  banner.classList.remove("hidden");
}

function clearError(): void {
  banner.classList.add("hidden");
}

function describe(err: unknown): string {
  if (err instanceof ApiError) {
    return `request failed (${err.status}): ${err.message}`;
  }
  return "service unreachable; is `cbir serve` running?";
}

// ---------------------------------------------------------------------------
// query panel
// ---------------------------------------------------------------------------

let selectedFile: File | null = null;

function renderCard(card: ResultCard): HTMLElement {
  const root = el("div", "card");
  const img = el("img", "thumb");
  img.src = card.thumbnailUrl;
  img.alt = `image ${card.imageId}`;
  root.appendChild(img);

  const title = el("div", "card-title", `#${card.rank} · image ${card.imageId}`);
  root.appendChild(title);
  root.appendChild(
    el(
      "div",
      "card-scores",
      `score ${formatScore(card.score)} · color ${formatScore(card.colorSim)}` +
        ` · texture ${formatScore(card.textureSim)}`,
    ),
  );

  const notice = el("div", "card-notice hidden");
  const buttons = el("div", "card-buttons");
  const positive = el("button", "good", "relevant");
  const negative = el("button", "bad", "not relevant");

  const refresh = () => {
    if (card.feedbackState === "submitted") {
      positive.disabled = true;
      negative.disabled = true;
      root.classList.add("submitted");
    }
    if (card.notice) {
      notice.textContent = card.notice;
      notice.classList.remove("hidden");
    }
  };

  const submit = async (polarity: "positive" | "negative") => {
    if (!gate.begin(card, polarity)) {
      return; // double click or already submitted
    }
    positive.disabled = true;
    negative.disabled = true;
    try {
      const response = await client.feedback(card.queryId, card.imageId, polarity);
      gate.complete(card, response);
    } catch (err) {
      if (err instanceof ApiError) {
        gate.fail(card, err.status, err.message);
      } else {
        gate.fail(card, 0, describe(err));
        positive.disabled = false;
        negative.disabled = false;
      }
    }
    refresh();
  };

  positive.addEventListener("click", () => void submit("positive"));
  negative.addEventListener("click", () => void submit("negative"));
  buttons.appendChild(positive);
  buttons.appendChild(negative);
  root.appendChild(buttons);
  root.appendChild(notice);
  return root;
}

async function runQuery(): Promise<void> {
  clearError();
  if (!selectedFile) {
    showError("choose an image first");
    return;
  }
  const topK = Number((byId<HTMLInputElement>("top-k")).value) || 10;
  const threshold = Number((byId<HTMLInputElement>("threshold")).value);
  const summary = byId<HTMLElement>("query-summary");
  const grid = byId<HTMLElement>("results");
  summary.textContent = "searching…";
  grid.replaceChildren();
  try {
    const response = await client.query(
      selectedFile,
      topK,
      Number.isFinite(threshold) ? threshold : 0.5,
      selectedFile.name,
    );
    const cards = cardsFromResponse(response);
    summary.textContent =
      `predicted ${response.predicted_category} · ` +
      `${response.comparisons} comparisons · query ${response.query_id}`;
    if (cards.length === 0) {
      grid.appendChild(el("div", "empty", "no matches above threshold"));
      return;
    }
    for (const card of cards) {
      grid.appendChild(renderCard(card));
    }
  } catch (err) {
    summary.textContent = "";
    showError(describe(err));
  }
}

function wireUpload(): void {
  const drop = byId<HTMLElement>("drop-zone");
  const input = byId<HTMLInputElement>("file-input");
  const label = byId<HTMLElement>("file-label");

  const select = (file: File | null) => {
    selectedFile = file;
    label.textContent = file ? file.name : "drop an image or click to choose";
  };

  drop.addEventListener("click", () => input.click());
  input.addEventListener("change", () => select(input.files?.[0] ?? null));
  drop.addEventListener("dragover", (event) => {
    event.preventDefault();
    drop.classList.add("hover");
  });
  drop.addEventListener("dragleave", () => drop.classList.remove("hover"));
  drop.addEventListener("drop", (event) => {
    event.preventDefault();
    drop.classList.remove("hover");
    select(event.dataTransfer?.files?.[0] ?? null);
  });
}

// ---------------------------------------------------------------------------
// browse panel
// ---------------------------------------------------------------------------

let categoryNames: Map<number, string> = new Map();

async function runBrowse(): Promise<void> {
  clearError();
  const keywords = byId<HTMLInputElement>("keywords").value.trim();
  if (!keywords) {
    return; // empty query is a no-op
  }
  const grid = byId<HTMLElement>("browse-results");
  grid.replaceChildren();
  try {
    const hits = await client.search(keywords);
    if (hits.length === 0) {
      grid.appendChild(el("div", "empty", "no matching images"));
      return;
    }
    for (const hit of hits) {
      const card = el("div", "card");
      const img = el("img", "thumb");
      img.src = hit.url;
      img.alt = `image ${hit.image_id}`;
      card.appendChild(img);
      card.appendChild(el("div", "card-title", `image ${hit.image_id}`));
      card.appendChild(el("span", "badge", hit.category ?? "uncategorized"));
      card.appendChild(el("div", "card-scores", hit.keywords.join(", ")));
      grid.appendChild(card);
    }
  } catch (err) {
    showError(describe(err));
  }
}

// ---------------------------------------------------------------------------
// boot
// ---------------------------------------------------------------------------

async function boot(): Promise<void> {
  banner = byId<HTMLElement>("error-banner");
  wireUpload();
  byId<HTMLButtonElement>("query-button").addEventListener(
    "click", () => void runQuery(),
  );
  byId<HTMLButtonElement>("browse-button").addEventListener(
    "click", () => void runBrowse(),
  );
  byId<HTMLInputElement>("keywords").addEventListener("keydown", (event) => {
    if (event.key === "Enter") {
      void runBrowse();
    }
  });
  try {
    const [health, categories] = await Promise.all([
      client.health(),
      client.categories(),
    ]);
    categoryNames = new Map(categories.map((c: CategoryInfo) => [c.code, c.name]));
    byId<HTMLElement>("health").textContent =
      `${health.records} images · classifier ${health.trained ? "ready" : "untrained"}` +
      ` · categories: ${[...categoryNames.values()].join(", ")}`;
  } catch (err) {
    showError(describe(err));
  }
}

document.addEventListener("DOMContentLoaded", () => void boot());
