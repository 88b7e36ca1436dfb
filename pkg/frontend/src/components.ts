// DOM builders shared by the instructor and student views. Pure render
// functions: state in, elements out; handlers are passed in by the caller.

import { BankEntryPayload, InstancePayload, QuestionPayload, RecommendationPayload, TallyPayload } from './api.js'
import { countdownText, percentages, phaseBadge } from './format.js'

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag)
  if (className) node.className = className
  if (text !== undefined) node.textContent = text
  return node
}

export function clear(node: HTMLElement): HTMLElement {
  while (node.firstChild) node.removeChild(node.firstChild)
  return node
}

export function renderQuestion(question: QuestionPayload): HTMLElement {
  const box = el('div', 'question')
  if (question.open_ended) {
    box.appendChild(el('p', 'stem', question.prompt))
    return box
  }
  box.appendChild(el('p', 'stem', question.stem))
  const list = el('ul', 'options')
  for (const option of question.options) {
    list.appendChild(el('li', 'option', `${option.label}) ${option.text}`))
  }
  box.appendChild(list)
  return box
}

/** Histogram of the latest tally payload: one bar per option, a percentage
 * and count per bar, the voter total, and the phase badge. Renders only what
 * the payload says. */
export function renderTallyView(
  tally: TallyPayload,
  options: { label: string; text: string }[],
  phase: string,
): HTMLElement {
  const box = el('div', 'tally')
  const pct = percentages(tally.counts)
  const head = el('div', 'tally-head')
  head.appendChild(el('span', 'voter-total', `${tally.voters} vote(s)`))
  head.appendChild(el('span', 'phase-badge', phaseBadge(phase)))
  if (tally.closed) head.appendChild(el('span', 'closed-badge', 'final'))
  box.appendChild(head)
  for (const option of options) {
    const count = tally.counts[option.label] ?? 0
    const share = pct[option.label] ?? 0
    const row = el('div', 'bar-row')
    row.dataset.label = option.label
    row.dataset.count = String(count)
    const bar = el('div', 'bar')
    bar.style.width = `${share}%`
    row.appendChild(el('span', 'bar-label', option.label))
    row.appendChild(bar)
    row.appendChild(el('span', 'bar-count', `${count} (${share}%)`))
    box.appendChild(row)
  }
  return box
}

export function renderGate(): HTMLElement {
  const gate = el('div', 'tally-gate', 'Vote to see results.')
  gate.dataset.gate = 'true'
  return gate
}

export function renderVotePanel(
  instance: InstancePayload,
  onVote: (label: string) => void,
): HTMLElement {
  const panel = el('div', 'vote-panel')
  panel.appendChild(renderQuestion(instance.question))
  const buttons = el('div', 'vote-buttons')
  for (const option of instance.question.options ?? []) {
    const button = el('button', 'vote-button', option.label)
    button.dataset.label = option.label
    button.disabled = instance.voted || instance.closed
    button.addEventListener('click', () => {
      for (const b of Array.from(buttons.querySelectorAll('button'))) b.disabled = true
      onVote(option.label)
    })
    buttons.appendChild(button)
  }
  panel.appendChild(buttons)
  return panel
}

export function renderCountdown(instance: InstancePayload, nowSeconds: number): HTMLElement {
  const badge = el('span', 'countdown-badge', countdownText(instance.deadline, nowSeconds))
  badge.dataset.deadline = instance.deadline === null ? '' : String(instance.deadline)
  return badge
}

export function renderVettingQueue(
  entries: BankEntryPayload[],
  onVerdict: (entryId: string, decision: 'approve' | 'reject', difficulty: number) => void,
): HTMLElement {
  const queue = el('div', 'vetting-queue')
  queue.dataset.pending = String(entries.length)
  if (entries.length === 0) {
    queue.appendChild(el('p', 'empty', 'Nothing waiting for review.'))
    return queue
  }
  for (const entry of entries) {
    const card = el('div', 'vetting-card')
    card.dataset.entry = entry.id
    card.appendChild(el('p', 'author', `from ${entry.provenance.author}`))
    card.appendChild(renderQuestion(entry.question))
    const slider = el('input') as HTMLInputElement
    slider.type = 'range'
    slider.min = '1'
    slider.max = '10'
    slider.value = '5'
    slider.className = 'difficulty-slider'
    const sliderLabel = el('span', 'difficulty-value', '5')
    slider.addEventListener('input', () => (sliderLabel.textContent = slider.value))
    const approve = el('button', 'approve', 'Approve')
    approve.addEventListener('click', () => onVerdict(entry.id, 'approve', Number(slider.value)))
    const reject = el('button', 'reject', 'Reject')
    reject.addEventListener('click', () => onVerdict(entry.id, 'reject', Number(slider.value)))
    const controls = el('div', 'vetting-controls')
    controls.append(slider, sliderLabel, approve, reject)
    card.appendChild(controls)
    queue.appendChild(card)
  }
  return queue
}

export function renderBank(
  entries: BankEntryPayload[],
  onPush: ((entryId: string) => void) | null,
): HTMLElement {
  const bank = el('div', 'bank')
  bank.dataset.entries = String(entries.length)
  if (entries.length === 0) {
    bank.appendChild(el('p', 'empty', 'The bank is empty.'))
    return bank
  }
  for (const entry of entries) {
    const row = el('div', 'bank-row')
    row.dataset.entry = entry.id
    const difficulty = entry.difficulty === null ? '—' : entry.difficulty.toFixed(1)
    row.appendChild(el('span', 'bank-difficulty', difficulty))
    const stem = entry.question.open_ended ? entry.question.prompt : entry.question.stem
    row.appendChild(el('span', 'bank-stem', stem ?? ''))
    if (onPush) {
      const push = el('button', 'push', 'Push to class')
      push.addEventListener('click', () => onPush(entry.id))
      row.appendChild(push)
    }
    bank.appendChild(row)
  }
  return bank
}

export function renderPacingCard(rec: RecommendationPayload): HTMLElement {
  const card = el('div', 'pacing-card')
  card.dataset.itemCount = String(rec.item_count)
  card.appendChild(el('h3', undefined, 'Pacing recommendation'))
  card.appendChild(
    el(
      'p',
      'pacing-line',
      `Push ${rec.item_count} item(s) from difficulty ${rec.band[0]}–${rec.band[1]}.`,
    ),
  )
  if (rec.advisory) card.appendChild(el('p', 'advisory', `advisory: ${rec.advisory}`))
  return card
}

export function renderDifficultyChooser(
  current: string | null,
  onChoose: (choice: 'moderate' | 'elevated') => void,
): HTMLElement {
  const box = el('div', 'difficulty-chooser')
  box.appendChild(el('span', undefined, 'Quiz difficulty:'))
  for (const choice of ['moderate', 'elevated'] as const) {
    const button = el('button', 'difficulty-choice', choice)
    button.dataset.choice = choice
    if (current === choice) button.classList.add('selected')
    button.addEventListener('click', () => onChoose(choice))
    box.appendChild(button)
  }
  return box
}

export interface SubmissionFields {
  prompts: string[]
  questionText: string
  transcript: string
}

/** Submission form with client-side validation mirroring the server's:
 * at least one prompt line and a non-empty question. */
export function renderSubmissionForm(
  cueTemplates: string[],
  onSubmit: (fields: SubmissionFields) => void,
): HTMLElement {
  const form = el('div', 'submission-form')
  form.appendChild(el('h3', undefined, 'Submit your generated question'))
  if (cueTemplates.length > 0) {
    const cueBox = el('p', 'cues', `Cue starters: ${cueTemplates.join(' · ')}`)
    form.appendChild(cueBox)
  }
  const prompts = el('textarea', 'prompts-input') as HTMLTextAreaElement
  prompts.placeholder = 'Your prompts, one per line'
  const question = el('textarea', 'question-input') as HTMLTextAreaElement
  question.placeholder = 'The generated question text'
  const transcript = el('textarea', 'transcript-input') as HTMLTextAreaElement
  transcript.placeholder = 'Optional: paste the interaction transcript'
  const error = el('p', 'form-error')
  error.style.display = 'none'
  const send = el('button', 'submit-question', 'Submit')
  send.addEventListener('click', () => {
    const promptLines = prompts.value
      .split('\n')
      .map(line => line.trim())
      .filter(line => line.length > 0)
    if (promptLines.length === 0 || question.value.trim().length === 0) {
      error.textContent = 'A submission needs at least one prompt and the question text.'
      error.style.display = ''
      return
    }
    error.style.display = 'none'
    onSubmit({
      prompts: promptLines,
      questionText: question.value.trim(),
      transcript: transcript.value.trim(),
    })
  })
  form.append(prompts, question, transcript, error, send)
  return form
}

export function renderError(exc: { code?: string; message?: string }): HTMLElement {
  const code = exc.code ?? 'Error'
  return el('p', 'api-error', `${exc.message ?? 'request failed'} [${code}]`)
}
