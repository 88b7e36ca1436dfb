// Display-only derivations. Anything the backend computes (grades, tallies,
// pacing) arrives precomputed; these helpers just shape numbers for pixels.
/** Integer percentages per label that always sum to exactly 100 (largest
 * remainder method); empty when there are no votes yet. */
export function percentages(counts) {
    const labels = Object.keys(counts).sort();
    const total = labels.reduce((sum, l) => sum + counts[l], 0);
    if (total === 0)
        return {};
    const exact = labels.map(l => (counts[l] * 100) / total);
    const floors = exact.map(Math.floor);
    let leftover = 100 - floors.reduce((a, b) => a + b, 0);
    const order = labels
        .map((l, i) => ({ i, frac: exact[i] - floors[i] }))
        .sort((a, b) => b.frac - a.frac || a.i - b.i);
    const out = {};
    labels.forEach((l, i) => (out[l] = floors[i]));
    for (const { i } of order) {
        if (leftover <= 0)
            break;
        out[labels[i]] += 1;
        leftover -= 1;
    }
    return out;
}
/** Remaining time as m:ss, clamped at 0:00. */
export function countdownText(deadline, now) {
    if (deadline === null)
        return 'no limit';
    const left = Math.max(0, Math.ceil(deadline - now));
    const minutes = Math.floor(left / 60);
    const seconds = left % 60;
    return `${minutes}:${String(seconds).padStart(2, '0')}`;
}
const PHASE_LABELS = {
    created: 'created',
    poll_open: 'poll open',
    poll_closed: 'poll closed',
    prompt_phase: 'prompting',
    quiz_open: 'quiz open',
    quiz_closed: 'quiz closed',
    jitt_open: 'pre-class quiz open',
    consolidated: 'consolidated',
    discussed: 'discussed',
};
export function phaseBadge(phase) {
    return PHASE_LABELS[phase] ?? phase;
}
/** The next administrative phase target an instructor may jump to, if any. */
export function nextAdvanceTarget(kind, phase) {
    const map = {
        poll_prompt_quiz: { poll_closed: 'prompt_phase', quiz_closed: 'discussed' },
        quiz_prompt_discuss: { jitt_open: 'prompt_phase', consolidated: 'discussed' },
    };
    return map[kind]?.[phase] ?? null;
}
