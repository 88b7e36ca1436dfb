// Typed client for the flipdeck HTTP API. The UI never recomputes what the
// backend already computed: grades, tallies, bank state and pacing all come
// from these calls verbatim.
export class ApiError extends Error {
    constructor(status, code, message) {
        super(message);
        this.status = status;
        this.code = code;
    }
}
export class FlipdeckApi {
    constructor(baseUrl, token) {
        this.baseUrl = baseUrl;
        this.token = token;
    }
    async request(method, path, body) {
        const response = await fetch(this.baseUrl + path, {
            method,
            headers: {
                Authorization: `Bearer ${this.token}`,
                ...(body !== undefined ? { 'Content-Type': 'application/json' } : {}),
            },
            body: body !== undefined ? JSON.stringify(body) : undefined,
        });
        const text = await response.text();
        const data = text ? JSON.parse(text) : null;
        if (!response.ok) {
            const code = data && data.code ? data.code : `HTTP${response.status}`;
            const message = data && data.message ? data.message : response.statusText;
            throw new ApiError(response.status, code, message);
        }
        return data;
    }
    whoami() {
        return this.request('GET', '/whoami');
    }
    session(id) {
        return this.request('GET', `/sessions/${id}`);
    }
    sessions(course) {
        const query = course ? `?course=${encodeURIComponent(course)}` : '';
        return this.request('GET', `/sessions${query}`);
    }
    createSession(kind, course) {
        return this.request('POST', '/sessions', { kind, course });
    }
    openPoll(sessionId, text) {
        return this.request('POST', `/sessions/${sessionId}/polls`, { text });
    }
    openQuizFromBank(sessionId, bankEntryId) {
        return this.request('POST', `/sessions/${sessionId}/quizzes`, { bank_entry_id: bankEntryId });
    }
    advance(sessionId, target) {
        return this.request('POST', `/sessions/${sessionId}/advance`, { target });
    }
    instance(id) {
        return this.request('GET', `/instances/${id}`);
    }
    tally(instanceId) {
        return this.request('GET', `/instances/${instanceId}/tally`);
    }
    vote(instanceId, label) {
        return this.request('POST', `/instances/${instanceId}/votes`, { labels: [label] });
    }
    respond(instanceId, text) {
        return this.request('POST', `/instances/${instanceId}/responses`, { text });
    }
    closeInstance(instanceId) {
        return this.request('POST', `/instances/${instanceId}/close`);
    }
    submitQuestion(sessionId, prompts, questionText, transcript) {
        return this.request('POST', `/sessions/${sessionId}/submissions`, {
            prompts,
            question_text: questionText,
            transcript: transcript ?? null,
        });
    }
    chooseDifficulty(sessionId, choice) {
        return this.request('POST', `/sessions/${sessionId}/difficulty`, { choice });
    }
    consolidate(sessionId) {
        return this.request('POST', `/sessions/${sessionId}/consolidate`);
    }
    vettingQueue() {
        return this.request('GET', '/vetting/queue');
    }
    verdict(entryId, decision, difficulty) {
        return this.request('POST', `/vetting/${entryId}/verdict`, {
            decision,
            initial_difficulty: difficulty ?? null,
        });
    }
    bank(params) {
        const query = new URLSearchParams();
        if (params?.status)
            query.set('status', params.status);
        if (params?.kind)
            query.set('kind', params.kind);
        if (params?.band) {
            query.set('band_lo', String(params.band[0]));
            query.set('band_hi', String(params.band[1]));
        }
        const suffix = query.toString() ? `?${query}` : '';
        return this.request('GET', `/bank${suffix}`);
    }
    recommendation(course) {
        return this.request('GET', `/pacing/${course}/recommendation`);
    }
    cues() {
        return this.request('GET', '/fixtures/cues');
    }
    liveUrl(sessionId) {
        return `${this.baseUrl}/live/${sessionId}?token=${encodeURIComponent(this.token)}`;
    }
}
