// Scripted-browser acceptance flow against a real backend: instructor pushes
// a poll from the dashboard, three student clients vote, the dashboard
// histogram matches the API tally, an unvoted client stays gated, and a
// vetting approval moves an entry from the queue into the bank — all through
// DOM interactions, no page reloads.

import { ChildProcessWithoutNullStreams, spawn } from 'node:child_process'
import { resolve } from 'node:path'
import { afterAll, beforeAll, describe, expect, it } from 'vitest'

import { FlipdeckApi } from '../src/api'
import { DashboardHandle, mountInstructorDashboard } from '../src/instructor'
import { StudentViewHandle, mountStudentView } from '../src/student'

const POLL_TEXT = [
  'Which Boolean expression is equivalent to NOT (A OR B)?',
  'A) NOT A AND NOT B',
  'B) NOT A OR NOT B',
  'C) A AND B',
].join('\n')

const SUBMITTED_QUIZ = [
  'Which gate is universal by itself?',
  'A) NAND',
  'B) XOR',
  '(Note: The correct answer is A) NAND)',
].join('\n')

let backend: ChildProcessWithoutNullStreams
let baseUrl = ''

function api(actor: string): FlipdeckApi {
  return new FlipdeckApi(baseUrl, `tok-${actor}`)
}

async function waitFor<T>(probe: () => T | null | undefined | false, what: string, timeoutMs = 20000): Promise<T> {
  const start = Date.now()
  for (;;) {
    const value = probe()
    if (value) return value
    if (Date.now() - start > timeoutMs) throw new Error(`timed out waiting for ${what}`)
    await new Promise(resolve => setTimeout(resolve, 50))
  }
}

function mountPoint(name: string): HTMLElement {
  const node = document.createElement('div')
  node.id = name
  document.body.appendChild(node)
  return node
}

beforeAll(async () => {
  backend = spawn('python3', [resolve(process.cwd(), 'tests', 'server.py')], {
    stdio: ['ignore', 'pipe', 'pipe'],
  })
  let stderr = ''
  backend.stderr.on('data', chunk => (stderr += String(chunk)))
  const port = await new Promise<number>((resolve, reject) => {
    let buffer = ''
    const timer = setTimeout(
      () => reject(new Error(`backend never became ready\n${stderr}`)),
      30000,
    )
    backend.stdout.on('data', chunk => {
      buffer += String(chunk)
      const match = buffer.match(/READY (\d+)/)
      if (match) {
        clearTimeout(timer)
        resolve(Number(match[1]))
      }
    })
    backend.on('exit', code => reject(new Error(`backend exited ${code}\n${stderr}`)))
  })
  baseUrl = `http://127.0.0.1:${port}`
})

afterAll(() => {
  backend?.kill()
})

describe('classroom loop through the browser views', () => {
  const handles: (DashboardHandle | StudentViewHandle)[] = []

  afterAll(() => {
    for (const handle of handles) handle.stop()
  })

  it('runs poll → votes → gate → vetting → bank end to end', async () => {
    const prof = api('prof')
    const session = await prof.createSession('poll_prompt_quiz', 'ui-demo')

    // instructor dashboard comes up on the fresh session
    const dashboard = await mountInstructorDashboard(
      mountPoint('dash'), prof, session.id, 'ui-demo', 150,
    )
    handles.push(dashboard)
    const dash = dashboard.root

    // instructor pushes a poll from the composer
    const composer = dash.querySelector<HTMLTextAreaElement>('.poll-text')!
    expect(composer).toBeTruthy()
    composer.value = POLL_TEXT
    dash.querySelector<HTMLButtonElement>('.push-poll')!.click()
    await waitFor(() => dash.querySelector('.live-instance'), 'poll to appear on the dashboard')

    // three scripted student clients vote
    const votes: Record<string, string> = { 'stu-1': 'A', 'stu-2': 'B', 'stu-3': 'A' }
    for (const [actor, label] of Object.entries(votes)) {
      const view = await mountStudentView(mountPoint(actor), api(actor), session.id, 150)
      handles.push(view)
      const button = view.root.querySelector<HTMLButtonElement>(
        `.vote-button[data-label="${label}"]`,
      )!
      expect(button.disabled).toBe(false)
      button.click()
      await waitFor(
        () => view.root.querySelector('.student-tally .tally'),
        `${actor} to see the tally after voting`,
      )
      const buttons = view.root.querySelectorAll<HTMLButtonElement>('.vote-button')
      for (const b of Array.from(buttons)) expect(b.disabled).toBe(true)
    }

    // the dashboard histogram converges on 3 votes that match the API tally
    await waitFor(() => {
      const rows = dash.querySelectorAll('.live-instance .bar-row')
      if (rows.length === 0) return false
      const total = Array.from(rows).reduce(
        (sum, row) => sum + Number((row as HTMLElement).dataset.count), 0,
      )
      return total === 3 ? rows : false
    }, 'dashboard histogram to reach 3 votes')
    expect(dash.querySelector('.voter-total')!.textContent).toBe('3 vote(s)')

    const pollInstanceId = (dash.querySelector('.live-instance') as HTMLElement).dataset.instance!
    const apiTally = await prof.tally(pollInstanceId)
    expect(apiTally.voters).toBe(3)
    for (const row of Array.from(dash.querySelectorAll('.live-instance .bar-row'))) {
      const label = (row as HTMLElement).dataset.label!
      expect(Number((row as HTMLElement).dataset.count)).toBe(apiTally.counts[label] ?? 0)
    }

    // an unvoted client sees the gate message, not the numbers
    const bystander = await mountStudentView(mountPoint('stu-4'), api('stu-4'), session.id, 150)
    handles.push(bystander)
    const gate = bystander.root.querySelector('.student-tally [data-gate]')!
    expect(gate.textContent).toBe('Vote to see results.')
    expect(bystander.root.querySelector('.student-tally .tally')).toBeNull()

    // instructor closes the poll and opens the prompting phase
    dash.querySelector<HTMLButtonElement>('.close-instance')!.click()
    await waitFor(
      () => dash.querySelector<HTMLButtonElement>('button.advance'),
      'advance control after closing the poll',
    ).then(button => button.click())
    await waitFor(
      () => Array.from(dash.querySelectorAll('.phase-badge')).some(
        badge => badge.textContent === 'prompting',
      ),
      'session to reach the prompting phase',
    )

    // a student files a submission through the form (client-side validation first)
    const submitter = await mountStudentView(mountPoint('stu-1b'), api('stu-1'), session.id, 150)
    handles.push(submitter)
    const form = await waitFor(
      () => submitter.root.querySelector('.submission-form'),
      'submission form in the prompting phase',
    )
    form.querySelector<HTMLButtonElement>('.submit-question')!.click()
    expect(form.querySelector<HTMLElement>('.form-error')!.style.display).toBe('')
    form.querySelector<HTMLTextAreaElement>('.prompts-input')!.value =
      'Please quiz me on universal gates'
    form.querySelector<HTMLTextAreaElement>('.question-input')!.value = SUBMITTED_QUIZ
    form.querySelector<HTMLButtonElement>('.submit-question')!.click()
    await waitFor(
      () => submitter.root.querySelector('.submitted'),
      'submission confirmation',
    )

    // vetting approval moves the entry queue -> bank without a reload
    await dashboard.refresh()
    const queue = dash.querySelector<HTMLElement>('.vetting-queue')!
    expect(queue.dataset.pending).toBe('1')
    const card = queue.querySelector<HTMLElement>('.vetting-card')!
    const slider = card.querySelector<HTMLInputElement>('.difficulty-slider')!
    slider.value = '6'
    slider.dispatchEvent(new Event('input'))
    card.querySelector<HTMLButtonElement>('button.approve')!.click()
    await waitFor(() => {
      const pending = dash.querySelector<HTMLElement>('.vetting-queue')?.dataset.pending
      const banked = dash.querySelector<HTMLElement>('.bank')?.dataset.entries
      return pending === '0' && banked === '1'
    }, 'approval to move the entry from queue to bank')
    const banked = await prof.bank({ status: 'approved' })
    expect(banked.length).toBe(1)
    expect(banked[0].difficulty).toBe(6)

    // pushing the banked quiz starts the five-minute countdown badge
    dash.querySelector<HTMLButtonElement>('.bank-row button.push')!.click()
    const badge = await waitFor(
      () => dash.querySelector<HTMLElement>('.countdown-badge'),
      'countdown badge after pushing the quiz',
    )
    expect(badge.textContent).toBe('5:00')
  })
})
