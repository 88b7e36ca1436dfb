// Student view: vote (buttons lock after the first tap), see the tally only
// once voted, self-calibrate jitt difficulty, submit generated questions.

import { ApiError, FlipdeckApi, InstancePayload, SessionPayload } from './api.js'
import {
  clear,
  el,
  renderDifficultyChooser,
  renderError,
  renderGate,
  renderSubmissionForm,
  renderTallyView,
  renderVotePanel,
} from './components.js'
import { phaseBadge } from './format.js'
import { StreamHandle, watchTallies } from './stream.js'

export interface StudentViewHandle {
  refresh(): Promise<void>
  stop(): void
  root: HTMLElement
}

const SUBMITTING_PHASES = new Set(['prompt_phase', 'jitt_open'])

export async function mountStudentView(
  root: HTMLElement,
  api: FlipdeckApi,
  sessionId: string,
  pollIntervalMs?: number,
): Promise<StudentViewHandle> {
  root.classList.add('student-view')
  const header = el('div', 'student-header')
  const voteBox = el('section', 'student-vote')
  const tallyBox = el('section', 'student-tally')
  const extrasBox = el('section', 'student-extras')
  const errorBox = el('div', 'student-errors')
  root.append(header, errorBox, voteBox, tallyBox, extrasBox)

  let session: SessionPayload
  let current: InstancePayload | null = null
  let difficulty: string | null = null

  const showError = (exc: unknown) => {
    clear(errorBox)
    if (exc instanceof ApiError) errorBox.appendChild(renderError(exc))
    else errorBox.appendChild(renderError({ message: String(exc) }))
  }

  const renderTally = async () => {
    clear(tallyBox)
    if (!current || current.question.open_ended) return
    try {
      const tally = await api.tally(current.id)
      tallyBox.appendChild(renderTallyView(tally, current.question.options ?? [], session.phase))
    } catch (exc) {
      if (exc instanceof ApiError && exc.code === 'VoteRequired') {
        tallyBox.appendChild(renderGate())
      } else {
        showError(exc)
      }
    }
  }

  const renderVote = () => {
    clear(voteBox)
    if (!current) {
      voteBox.appendChild(el('p', 'no-question', 'No question is open.'))
      return
    }
    if (current.question.open_ended) {
      const panel = el('div', 'respond-panel')
      panel.appendChild(el('p', 'stem', current.question.prompt))
      const answer = el('textarea', 'response-input') as HTMLTextAreaElement
      const send = el('button', 'respond-button', 'Send answer')
      send.disabled = current.voted
      send.addEventListener('click', async () => {
        try {
          await api.respond(current!.id, answer.value)
          send.disabled = true
        } catch (exc) {
          showError(exc)
        }
      })
      panel.append(answer, send)
      voteBox.appendChild(panel)
      return
    }
    voteBox.appendChild(
      renderVotePanel(current, async label => {
        try {
          await api.vote(current!.id, label)
          current = await api.instance(current!.id)
          await renderTally()
        } catch (exc) {
          showError(exc)
          current = await api.instance(current!.id)
          renderVote()
        }
      }),
    )
  }

  const renderExtras = async () => {
    clear(extrasBox)
    if (session.kind === 'quiz_prompt_discuss' && session.phase === 'jitt_open') {
      extrasBox.appendChild(
        renderDifficultyChooser(difficulty, async choice => {
          try {
            await api.chooseDifficulty(session.id, choice)
            difficulty = choice
            await renderExtras()
          } catch (exc) {
            showError(exc)
          }
        }),
      )
    }
    if (SUBMITTING_PHASES.has(session.phase)) {
      let cueTemplates: string[] = []
      try {
        cueTemplates = Object.values(await api.cues()).map(cue => cue.template)
      } catch {
        // cues are decorative; the form works without them
      }
      extrasBox.appendChild(
        renderSubmissionForm(cueTemplates, async fields => {
          try {
            const transcript = fields.transcript
              ? { pasted: fields.transcript }
              : undefined
            await api.submitQuestion(session.id, fields.prompts, fields.questionText, transcript)
            clear(extrasBox)
            extrasBox.appendChild(el('p', 'submitted', 'Submitted for review. Thank you!'))
          } catch (exc) {
            showError(exc)
          }
        }),
      )
    }
  }

  const refresh = async () => {
    session = await api.session(sessionId)
    clear(header)
    header.appendChild(el('h2', undefined, `Session ${session.id}`))
    header.appendChild(el('span', 'phase-badge', phaseBadge(session.phase)))
    current = null
    for (const instanceId of session.instance_ids) {
      const instance = await api.instance(instanceId)
      if (!instance.closed) current = instance
    }
    if (!current && session.instance_ids.length > 0) {
      current = await api.instance(session.instance_ids[session.instance_ids.length - 1])
    }
    renderVote()
    await renderTally()
    await renderExtras()
  }

  await refresh()
  const stream: StreamHandle = watchTallies(
    api,
    sessionId,
    async update => {
      if (current && update.instance === current.id) {
        clear(tallyBox)
        tallyBox.appendChild(
          renderTallyView(update.tally, current.question.options ?? [], session.phase),
        )
      }
    },
    pollIntervalMs,
  )
  return { refresh, stop: () => stream.stop(), root }
}
