import assert from "node:assert/strict";
import { test } from "node:test";
import { cardsFromResponse, FeedbackGate, formatScore, } from "../dist/state.js";
const response = {
    query_id: 11,
    predicted_category: "boats",
    predicted_code: 0,
    comparisons: 5,
    results: [
        { image_id: 9, color_sim: 0.5012, texture_sim: 0.25, score: 0.334, rank: 2, url: "/images/9" },
        { image_id: 3, color_sim: 1, texture_sim: 1, score: 1, rank: 1, url: "/images/3" },
        { image_id: 4, color_sim: 0.125, texture_sim: 0.8, score: 0.216, rank: 3, url: "/images/4" },
    ],
};
test("cards render strictly in rank order", () => {
    const cards = cardsFromResponse(response);
    assert.deepEqual(cards.map((c) => c.rank), [1, 2, 3]);
    assert.deepEqual(cards.map((c) => c.imageId), [3, 9, 4]);
    assert.equal(cards[0].thumbnailUrl, "/images/3");
    assert.equal(cards[0].queryId, 11);
    assert.ok(cards.every((c) => c.feedbackState === "none" && c.notice === null));
});
test("displayed scores are the payload values to two decimals", () => {
    const cards = cardsFromResponse(response);
    assert.equal(formatScore(cards[0].score), "1.00");
    assert.equal(formatScore(cards[1].score), "0.33");
    assert.equal(formatScore(cards[1].colorSim), "0.50");
    assert.equal(formatScore(cards[2].textureSim), "0.80");
});
test("feedback state machine is forward-only", () => {
    const gate = new FeedbackGate();
    const card = cardsFromResponse(response)[0];
    assert.equal(gate.begin(card, "negative"), true);
    assert.equal(card.feedbackState, "negative");
    // double click while in flight is ignored
    assert.equal(gate.begin(card, "negative"), false);
    assert.equal(gate.begin(card, "positive"), false);
    gate.complete(card, { reassigned: false, new_category: null });
    assert.equal(card.feedbackState, "submitted");
    assert.equal(card.notice, null);
    // never backwards
    assert.equal(gate.begin(card, "positive"), false);
    assert.equal(card.feedbackState, "submitted");
});
test("reassignment renders an inline notice", () => {
    const gate = new FeedbackGate();
    const card = cardsFromResponse(response)[1];
    gate.begin(card, "negative");
    gate.complete(card, { reassigned: true, new_category: "animals" });
    assert.equal(card.feedbackState, "submitted");
    assert.equal(card.notice, "reassigned to animals");
});
test("uncategorized reassignment has its own notice", () => {
    const gate = new FeedbackGate();
    const card = cardsFromResponse(response)[1];
    gate.begin(card, "negative");
    gate.complete(card, { reassigned: true, new_category: null });
    assert.equal(card.notice, "now uncategorized");
});
test("409 conflict locks the card as already submitted", () => {
    const gate = new FeedbackGate();
    const card = cardsFromResponse(response)[2];
    gate.begin(card, "positive");
    gate.fail(card, 409, "duplicate");
    assert.equal(card.feedbackState, "submitted");
    assert.equal(card.notice, "feedback already recorded");
    assert.equal(gate.begin(card, "negative"), false);
});
test("other failures release the card for a retry", () => {
    const gate = new FeedbackGate();
    const card = cardsFromResponse(response)[2];
    gate.begin(card, "negative");
    gate.fail(card, 503, "service warming up");
    assert.equal(card.feedbackState, "none");
    assert.equal(card.notice, "service warming up");
    assert.equal(gate.begin(card, "negative"), true);
});
