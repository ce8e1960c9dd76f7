/** Microphone capture and transcription upload.
 *
 * The transcript is not dispatched directly: it lands in the input box for
 * the user to confirm or edit, so a mistranscription never mutates the
 * model unseen. Everything browser-specific is injected for testability.
 */

export interface TranscriptResult {
  text: string;
  languageTag: string;
  duration: number;
  digest: string;
  outcomeStatus: string;
}

export class AudioUnsupported extends Error {}
export class TranscriptionFailed extends Error {}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export async function uploadAudio(
  baseUrl: string,
  sessionId: string,
  blob: Blob,
  fetchImpl: FetchLike = fetch,
): Promise<TranscriptResult> {
  if (blob.size === 0) {
    throw new AudioUnsupported("empty recording");
  }
  const form = new FormData();
  form.append("file", blob, "command.wav");
  const response = await fetchImpl(`${baseUrl}/sessions/${sessionId}/audio`, {
    method: "POST",
    body: form,
  });
  if (response.status === 422) {
    const body = (await response.json()) as { detail?: string };
    throw new TranscriptionFailed(body.detail ?? "transcription rejected");
  }
  if (!response.ok) {
    throw new TranscriptionFailed(`audio upload failed with ${response.status}`);
  }
  const body = (await response.json()) as {
    transcript: { text: string; language_tag: string; duration: number };
    digest: string;
    outcome: { status: string };
  };
  return {
    text: body.transcript.text,
    languageTag: body.transcript.language_tag,
    duration: body.transcript.duration,
    digest: body.digest,
    outcomeStatus: body.outcome.status,
  };
}

export interface RecorderLike {
  start(): void;
  stop(): Promise<Blob>;
}

export type RecorderFactory = () => Promise<RecorderLike>;

/** Default factory: real getUserMedia + MediaRecorder. Throws
 * AudioUnsupported when the browser denies or lacks a microphone, which the
 * UI turns into a disabled mic button with a tooltip. */
export async function browserRecorder(): Promise<RecorderLike> {
  if (!navigator.mediaDevices?.getUserMedia || typeof MediaRecorder === "undefined") {
    throw new AudioUnsupported("microphone capture not supported here");
  }
  let stream: MediaStream;
  try {
    stream = await navigator.mediaDevices.getUserMedia({ audio: true });
  } catch {
    throw new AudioUnsupported("microphone permission denied");
  }
  const recorder = new MediaRecorder(stream);
  const chunks: BlobPart[] = [];
  recorder.ondataavailable = (event) => chunks.push(event.data);
  return {
    start: () => recorder.start(),
    stop: () =>
      new Promise<Blob>((resolve) => {
        recorder.onstop = () => {
          stream.getTracks().forEach((track) => track.stop());
          resolve(new Blob(chunks, { type: recorder.mimeType || "audio/webm" }));
        };
        recorder.stop();
      }),
  };
}
