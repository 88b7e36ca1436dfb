import { describe, expect, it, vi } from 'vitest'

import { InstancePayload, TallyPayload } from '../src/api'
import {
  renderGate,
  renderSubmissionForm,
  renderTallyView,
  renderVotePanel,
  renderVettingQueue,
} from '../src/components'

const OPTIONS = [
  { label: 'A', text: 'left' },
  { label: 'B', text: 'right' },
]

function tally(counts: Record<string, number>, closed = false): TallyPayload {
  const voters = Object.values(counts).reduce((a, b) => a + b, 0)
  return { question_ref: 'q1', counts, voters, closed }
}

function instance(voted = false): InstancePayload {
  return {
    id: 'i1',
    session_id: 's1',
    role: 'poll',
    opened_at: 0,
    deadline: null,
    closed: false,
    voted,
    question: { id: 'q1', stem: 'Pick.', options: OPTIONS },
  }
}

describe('renderTallyView', () => {
  it('renders exactly the payload counts — no client-side arithmetic on votes', () => {
    const view = renderTallyView(tally({ A: 2, B: 1 }), OPTIONS, 'poll_open')
    const rows = view.querySelectorAll<HTMLElement>('.bar-row')
    expect(rows[0].dataset.count).toBe('2')
    expect(rows[1].dataset.count).toBe('1')
    expect(view.querySelector('.voter-total')!.textContent).toBe('3 vote(s)')
    expect(view.querySelector('.phase-badge')!.textContent).toBe('poll open')
  })

  it('shows zero bars for options with no votes and marks finals', () => {
    const view = renderTallyView(tally({ A: 1 }, true), OPTIONS, 'poll_closed')
    const rows = view.querySelectorAll<HTMLElement>('.bar-row')
    expect(rows[1].dataset.count).toBe('0')
    expect(view.querySelector('.closed-badge')).not.toBeNull()
  })
})

describe('gate and vote panel', () => {
  it('renders the gate message', () => {
    expect(renderGate().textContent).toBe('Vote to see results.')
  })

  it('disables every button after one tap', () => {
    const onVote = vi.fn()
    const panel = renderVotePanel(instance(), onVote)
    const buttons = panel.querySelectorAll<HTMLButtonElement>('.vote-button')
    buttons[1].click()
    expect(onVote).toHaveBeenCalledWith('B')
    for (const b of Array.from(buttons)) expect(b.disabled).toBe(true)
  })

  it('starts disabled when the viewer already voted', () => {
    const panel = renderVotePanel(instance(true), () => {})
    const buttons = panel.querySelectorAll<HTMLButtonElement>('.vote-button')
    for (const b of Array.from(buttons)) expect(b.disabled).toBe(true)
  })
})

describe('submission form validation', () => {
  it('blocks empty prompts client-side before any request', () => {
    const onSubmit = vi.fn()
    const form = renderSubmissionForm([], onSubmit)
    form.querySelector<HTMLTextAreaElement>('.question-input')!.value = 'Q?\nA) x\nB) y'
    form.querySelector<HTMLButtonElement>('.submit-question')!.click()
    expect(onSubmit).not.toHaveBeenCalled()
    expect(form.querySelector<HTMLElement>('.form-error')!.style.display).toBe('')
  })

  it('splits prompt lines and passes the fields through', () => {
    const onSubmit = vi.fn()
    const form = renderSubmissionForm(['How are {} and {} alike?'], onSubmit)
    form.querySelector<HTMLTextAreaElement>('.prompts-input')!.value = 'one\n\n two '
    form.querySelector<HTMLTextAreaElement>('.question-input')!.value = ' Q? '
    form.querySelector<HTMLButtonElement>('.submit-question')!.click()
    expect(onSubmit).toHaveBeenCalledWith({
      prompts: ['one', 'two'],
      questionText: 'Q?',
      transcript: '',
    })
  })
})

describe('vetting queue', () => {
  it('passes the slider difficulty to the verdict handler', () => {
    const onVerdict = vi.fn()
    const queue = renderVettingQueue(
      [
        {
          id: 'b1',
          status: 'pending',
          difficulty: null,
          initial_difficulty: null,
          topic: null,
          question: { id: 'q', stem: 'S?', options: OPTIONS },
          provenance: { author: 'stu-1', prompts: ['p'] },
        },
      ],
      onVerdict,
    )
    const slider = queue.querySelector<HTMLInputElement>('.difficulty-slider')!
    slider.value = '8'
    slider.dispatchEvent(new Event('input'))
    queue.querySelector<HTMLButtonElement>('button.approve')!.click()
    expect(onVerdict).toHaveBeenCalledWith('b1', 'approve', 8)
  })
})
