// Tally updates: server-sent events when the platform has EventSource,
// otherwise a polling fallback (classroom networks are hostile). Either way
// every update is a full snapshot fetched/pushed from the backend; the
// client never mutates the numbers.

import { FlipdeckApi, TallyPayload } from './api.js'

export interface TallyUpdate {
  instance: string
  tally: TallyPayload
}

export interface StreamHandle {
  stop(): void
  readonly mode: 'sse' | 'poll'
}

const POLL_INTERVAL_MS = 2000

export function watchTallies(
  api: FlipdeckApi,
  sessionId: string,
  onUpdate: (update: TallyUpdate) => void,
  intervalMs: number = POLL_INTERVAL_MS,
): StreamHandle {
  if (typeof EventSource !== 'undefined') {
    const source = new EventSource(api.liveUrl(sessionId))
    source.addEventListener('tally', event => {
      const data = JSON.parse((event as MessageEvent).data)
      onUpdate({ instance: data.instance, tally: data.tally })
    })
    return { mode: 'sse', stop: () => source.close() }
  }
  let stopped = false
  const tick = async () => {
    if (stopped) return
    try {
      const session = await api.session(sessionId)
      for (const instanceId of session.instance_ids) {
        const instance = await api.instance(instanceId)
        if (instance.question.open_ended) continue
        try {
          const tally = await api.tally(instanceId)
          onUpdate({ instance: instanceId, tally })
        } catch {
          // gated for this viewer; skip silently
        }
      }
    } catch {
      // transient network trouble: keep polling
    }
    if (!stopped) timer = setTimeout(tick, intervalMs)
  }
  let timer = setTimeout(tick, 0)
  return {
    mode: 'poll',
    stop: () => {
      stopped = true
      clearTimeout(timer)
    },
  }
}
