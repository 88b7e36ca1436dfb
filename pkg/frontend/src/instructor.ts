// Instructor dashboard: vetting queue, bank browser with push-to-class,
// live histogram per instance, phase controls, pacing recommendation.

import { ApiError, FlipdeckApi, InstancePayload, SessionPayload, TallyPayload } from './api.js'
import {
  clear,
  el,
  renderBank,
  renderCountdown,
  renderError,
  renderPacingCard,
  renderTallyView,
  renderVettingQueue,
} from './components.js'
import { nextAdvanceTarget, phaseBadge } from './format.js'
import { StreamHandle, watchTallies } from './stream.js'

export interface DashboardHandle {
  refresh(): Promise<void>
  stop(): void
  root: HTMLElement
}

export async function mountInstructorDashboard(
  root: HTMLElement,
  api: FlipdeckApi,
  sessionId: string,
  course: string,
  pollIntervalMs?: number,
): Promise<DashboardHandle> {
  root.classList.add('dashboard')
  const header = el('div', 'dash-header')
  const queueBox = el('section', 'dash-queue')
  const bankBox = el('section', 'dash-bank')
  const liveBox = el('section', 'dash-live')
  const pacingBox = el('section', 'dash-pacing')
  const errorBox = el('div', 'dash-errors')
  root.append(header, errorBox, liveBox, queueBox, bankBox, pacingBox)

  let session: SessionPayload
  const instances = new Map<string, InstancePayload>()
  const latestTallies = new Map<string, TallyPayload>()

  const showError = (exc: unknown) => {
    clear(errorBox)
    if (exc instanceof ApiError) errorBox.appendChild(renderError(exc))
    else errorBox.appendChild(renderError({ message: String(exc) }))
  }

  const renderHeader = () => {
    clear(header)
    header.appendChild(el('h2', undefined, `Session ${session.id} — ${session.kind}`))
    header.appendChild(el('span', 'phase-badge', phaseBadge(session.phase)))
    if (session.kind === 'poll_prompt_quiz' && session.phase === 'created') {
      const composer = el('div', 'poll-composer')
      const text = el('textarea', 'poll-text') as HTMLTextAreaElement
      text.placeholder = 'Poll text: stem, then A) … / B) … lines'
      const push = el('button', 'push-poll', 'Push poll')
      push.addEventListener('click', async () => {
        try {
          const instance = await api.openPoll(session.id, text.value)
          instances.set(instance.id, instance)
          session = await api.session(session.id)
          renderHeader()
          renderLive()
        } catch (exc) {
          showError(exc)
        }
      })
      composer.append(text, push)
      header.appendChild(composer)
    }
    const target = nextAdvanceTarget(session.kind, session.phase)
    if (target) {
      const advance = el('button', 'advance', `Advance to ${phaseBadge(target)}`)
      advance.addEventListener('click', async () => {
        try {
          session = await api.advance(session.id, target)
          renderHeader()
        } catch (exc) {
          showError(exc)
        }
      })
      header.appendChild(advance)
    }
    for (const instance of instances.values()) {
      if (!instance.closed) {
        const close = el('button', 'close-instance', `Close ${instance.role}`)
        close.dataset.instance = instance.id
        close.addEventListener('click', async () => {
          try {
            await api.closeInstance(instance.id)
            await refresh()
          } catch (exc) {
            showError(exc)
          }
        })
        header.appendChild(close)
        if (instance.deadline !== null) {
          header.appendChild(renderCountdown(instance, instance.opened_at))
        }
      }
    }
  }

  const renderLive = () => {
    clear(liveBox)
    liveBox.appendChild(el('h3', undefined, 'Live tallies'))
    for (const instance of instances.values()) {
      if (instance.question.open_ended) continue
      const tally = latestTallies.get(instance.id)
      const holder = el('div', 'live-instance')
      holder.dataset.instance = instance.id
      holder.appendChild(el('p', 'live-stem', instance.question.stem ?? ''))
      if (tally) {
        holder.appendChild(
          renderTallyView(tally, instance.question.options ?? [], session.phase),
        )
      } else {
        holder.appendChild(el('p', 'no-votes', 'waiting for votes'))
      }
      liveBox.appendChild(holder)
    }
  }

  const renderQueueAndBank = async () => {
    const [queue, bank] = await Promise.all([api.vettingQueue(), api.bank()])
    clear(queueBox)
    queueBox.appendChild(el('h3', undefined, `Vetting queue (${queue.length})`))
    queueBox.appendChild(
      renderVettingQueue(queue, async (entryId, decision, difficulty) => {
        try {
          await api.verdict(entryId, decision, decision === 'approve' ? difficulty : undefined)
          await renderQueueAndBank() // queue -> bank without a reload
        } catch (exc) {
          showError(exc)
        }
      }),
    )
    clear(bankBox)
    const approved = bank.filter(entry => entry.status === 'approved')
    bankBox.appendChild(el('h3', undefined, `Bank (${approved.length} approved)`))
    bankBox.appendChild(
      renderBank(approved, async entryId => {
        try {
          const instance = await api.openQuizFromBank(session.id, entryId)
          instances.set(instance.id, instance)
          session = await api.session(session.id)
          renderHeader()
          renderLive()
        } catch (exc) {
          showError(exc)
        }
      }),
    )
  }

  const renderPacing = async () => {
    clear(pacingBox)
    try {
      pacingBox.appendChild(renderPacingCard(await api.recommendation(course)))
    } catch (exc) {
      pacingBox.appendChild(el('p', 'no-pacing', 'pacing not initialized'))
    }
  }

  const refresh = async () => {
    session = await api.session(sessionId)
    for (const instanceId of session.instance_ids) {
      const instance = await api.instance(instanceId)
      instances.set(instanceId, instance)
      if (!instance.question.open_ended) {
        try {
          latestTallies.set(instanceId, await api.tally(instanceId))
        } catch {
          // never happens for instructors; tolerate races anyway
        }
      }
    }
    renderHeader()
    renderLive()
    await renderQueueAndBank()
    await renderPacing()
  }

  await refresh()
  const stream: StreamHandle = watchTallies(
    api,
    sessionId,
    update => {
      latestTallies.set(update.instance, update.tally)
      renderLive()
    },
    pollIntervalMs,
  )
  return {
    refresh,
    stop: () => stream.stop(),
    root,
  }
}
