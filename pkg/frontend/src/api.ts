// Typed client for the flipdeck HTTP API. The UI never recomputes what the
// backend already computed: grades, tallies, bank state and pacing all come
// from these calls verbatim.

export interface TallyPayload {
  question_ref: string
  counts: Record<string, number>
  voters: number
  closed: boolean
}

export interface QuestionPayload {
  id: string
  stem: string
  options: { label: string; text: string }[]
  answer_key?: string[]
  note?: string | null
  kind?: string
  open_ended?: boolean
  prompt?: string
}

export interface InstancePayload {
  id: string
  session_id: string
  role: string
  opened_at: number
  deadline: number | null
  closed: boolean
  question: QuestionPayload
  voted: boolean
}

export interface SessionPayload {
  id: string
  kind: string
  course: string
  phase: string
  instance_ids: string[]
  talking_points: string[]
  config: { quiz_time_limit_s: number; prompt_phase_enabled: boolean }
}

export interface BankEntryPayload {
  id: string
  status: string
  difficulty: number | null
  initial_difficulty: number | null
  topic: string | null
  question: QuestionPayload
  provenance: { author: string; prompts: string[] }
}

export interface RecommendationPayload {
  item_count: number
  band: [number, number]
  advisory: string | null
}

export interface CuePayload {
  template: string
  arity: number
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message)
  }
}

export class FlipdeckApi {
  constructor(
    public baseUrl: string,
    private token: string,
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await fetch(this.baseUrl + path, {
      method,
      headers: {
        Authorization: `Bearer ${this.token}`,
        ...(body !== undefined ? { 'Content-Type': 'application/json' } : {}),
      },
      body: body !== undefined ? JSON.stringify(body) : undefined,
    })
    const text = await response.text()
    const data = text ? JSON.parse(text) : null
    if (!response.ok) {
      const code = data && data.code ? data.code : `HTTP${response.status}`
      const message = data && data.message ? data.message : response.statusText
      throw new ApiError(response.status, code, message)
    }
    return data as T
  }

  whoami(): Promise<{ id: string; role: string }> {
    return this.request('GET', '/whoami')
  }

  session(id: string): Promise<SessionPayload> {
    return this.request('GET', `/sessions/${id}`)
  }

  sessions(course?: string): Promise<SessionPayload[]> {
    const query = course ? `?course=${encodeURIComponent(course)}` : ''
    return this.request('GET', `/sessions${query}`)
  }

  createSession(kind: string, course: string): Promise<SessionPayload> {
    return this.request('POST', '/sessions', { kind, course })
  }

  openPoll(sessionId: string, text: string): Promise<InstancePayload> {
    return this.request('POST', `/sessions/${sessionId}/polls`, { text })
  }

  openQuizFromBank(sessionId: string, bankEntryId: string): Promise<InstancePayload> {
    return this.request('POST', `/sessions/${sessionId}/quizzes`, { bank_entry_id: bankEntryId })
  }

  advance(sessionId: string, target: string): Promise<SessionPayload> {
    return this.request('POST', `/sessions/${sessionId}/advance`, { target })
  }

  instance(id: string): Promise<InstancePayload> {
    return this.request('GET', `/instances/${id}`)
  }

  tally(instanceId: string): Promise<TallyPayload> {
    return this.request('GET', `/instances/${instanceId}/tally`)
  }

  vote(instanceId: string, label: string): Promise<{ ok: boolean; tally: TallyPayload }> {
    return this.request('POST', `/instances/${instanceId}/votes`, { labels: [label] })
  }

  respond(instanceId: string, text: string): Promise<{ ok: boolean }> {
    return this.request('POST', `/instances/${instanceId}/responses`, { text })
  }

  closeInstance(instanceId: string): Promise<TallyPayload> {
    return this.request('POST', `/instances/${instanceId}/close`)
  }

  submitQuestion(
    sessionId: string,
    prompts: string[],
    questionText: string,
    transcript?: unknown,
  ): Promise<{ id: string }> {
    return this.request('POST', `/sessions/${sessionId}/submissions`, {
      prompts,
      question_text: questionText,
      transcript: transcript ?? null,
    })
  }

  chooseDifficulty(sessionId: string, choice: string): Promise<{ ok: boolean }> {
    return this.request('POST', `/sessions/${sessionId}/difficulty`, { choice })
  }

  consolidate(sessionId: string): Promise<{ talking_points: string[] }> {
    return this.request('POST', `/sessions/${sessionId}/consolidate`)
  }

  vettingQueue(): Promise<BankEntryPayload[]> {
    return this.request('GET', '/vetting/queue')
  }

  verdict(entryId: string, decision: string, difficulty?: number): Promise<BankEntryPayload> {
    return this.request('POST', `/vetting/${entryId}/verdict`, {
      decision,
      initial_difficulty: difficulty ?? null,
    })
  }

  bank(params?: { status?: string; kind?: string; band?: [number, number] }): Promise<BankEntryPayload[]> {
    const query = new URLSearchParams()
    if (params?.status) query.set('status', params.status)
    if (params?.kind) query.set('kind', params.kind)
    if (params?.band) {
      query.set('band_lo', String(params.band[0]))
      query.set('band_hi', String(params.band[1]))
    }
    const suffix = query.toString() ? `?${query}` : ''
    return this.request('GET', `/bank${suffix}`)
  }

  recommendation(course: string): Promise<RecommendationPayload> {
    return this.request('GET', `/pacing/${course}/recommendation`)
  }

  cues(): Promise<Record<string, CuePayload>> {
    return this.request('GET', '/fixtures/cues')
  }

  liveUrl(sessionId: string): string {
    return `${this.baseUrl}/live/${sessionId}?token=${encodeURIComponent(this.token)}`
  }
}
