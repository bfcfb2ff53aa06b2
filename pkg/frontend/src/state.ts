/** Result-card view models and the feedback state machine.
 *
 * Scores shown in the UI are the service payload values formatted to two
 * decimals; nothing is recomputed client side. Feedback state only moves
 * forward: none -> (positive | negative) -> submitted.
 */

import type { FeedbackResponse, QueryResponse } from "./api.js";

export type FeedbackState = "none" | "positive" | "negative" | "submitted";

export interface ResultCard {
  queryId: number;
  imageId: number;
  thumbnailUrl: string;
  rank: number;
  score: number;
  colorSim: number;
  textureSim: number;
  feedbackState: FeedbackState;
  /** Inline message, e.g. a category reassignment notice. */
  notice: string | null;
}

export function formatScore(value: number): string {
  return value.toFixed(2);
}

/** Build cards from a query response, strictly in rank order. */
export function cardsFromResponse(response: QueryResponse, baseUrl = ""): ResultCard[] {
  const ordered = [...response.results].sort((a, b) => a.rank - b.rank);
  return ordered.map((r) => ({
    queryId: response.query_id,
    imageId: r.image_id,
    thumbnailUrl: baseUrl + r.url,
    rank: r.rank,
    score: r.score,
    colorSim: r.color_sim,
    textureSim: r.texture_sim,
    feedbackState: "none",
    notice: null,
  }));
}

/** Forward-only transitions with an idempotent submission guard. */
export class FeedbackGate {
  /** Claim the card for a submission; false when one already happened. */
  begin(card: ResultCard, polarity: "positive" | "negative"): boolean {
    if (card.feedbackState !== "none") {
      return false;
    }
    card.feedbackState = polarity;
    return true;
  }

  /** Lock the card after a server acknowledgement. */
  complete(card: ResultCard, response: FeedbackResponse): void {
    card.feedbackState = "submitted";
    if (response.reassigned) {
      card.notice = response.new_category
        ? `reassigned to ${response.new_category}`
        : "now uncategorized";
    }
  }

  /** Handle a rejected submission; 409 means it was already recorded. */
  fail(card: ResultCard, status: number, detail: string): void {
    if (status === 409) {
      card.feedbackState = "submitted";
      card.notice = "feedback already recorded";
    } else {
      card.feedbackState = "none";
      card.notice = detail;
    }
  }
}
