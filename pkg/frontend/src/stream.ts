// NDJSON stream consumption shared by the browser app and the node tests.

export async function consumeNdjsonStream(
  body: ReadableStream<Uint8Array>,
  onLine: (line: string) => void,
): Promise<number> {
  const reader = body.getReader();
  const decoder = new TextDecoder();
  let buffer = "";
  let count = 0;
  for (;;) {
    const { done, value } = await reader.read();
    if (done) break;
    buffer += decoder.decode(value, { stream: true });
    let newline = buffer.indexOf("\n");
    while (newline !== -1) {
      const line = buffer.slice(0, newline).trim();
      buffer = buffer.slice(newline + 1);
      if (line) {
        count += 1;
        onLine(line);
      }
      newline = buffer.indexOf("\n");
    }
  }
  buffer += decoder.decode();
  const tail = buffer.trim();
  if (tail) {
    count += 1;
    onLine(tail);
  }
  return count;
}
