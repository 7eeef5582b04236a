// Decode a base64 binary PPM (P6, maxval 255) into RGBA pixels for a canvas.

export interface DecodedImage {
  width: number;
  height: number;
  rgba: Uint8ClampedArray<ArrayBuffer>;
}

export function decodeBase64(b64: string): Uint8Array {
  const binary = atob(b64);
  const bytes = new Uint8Array(binary.length);
  for (let i = 0; i < binary.length; i++) bytes[i] = binary.charCodeAt(i);
  return bytes;
}

export function decodePpm(bytes: Uint8Array): DecodedImage {
  // header: "P6\n{W} {H}\n255\n"
  let pos = 0;
  const token = (): string => {
    while (bytes[pos] === 0x20 || bytes[pos] === 0x0a || bytes[pos] === 0x09) pos++;
    const start = pos;
    while (pos < bytes.length && ![0x20, 0x0a, 0x09].includes(bytes[pos])) pos++;
    return String.fromCharCode(...bytes.slice(start, pos));
  };
  if (token() !== 'P6') throw new Error('not a P6 ppm');
  const width = parseInt(token(), 10);
  const height = parseInt(token(), 10);
  const maxval = parseInt(token(), 10);
  if (maxval !== 255) throw new Error(`unsupported maxval ${maxval}`);
  pos += 1; // single whitespace after maxval
  const rgba = new Uint8ClampedArray(width * height * 4);
  for (let i = 0; i < width * height; i++) {
    rgba[i * 4] = bytes[pos + i * 3];
    rgba[i * 4 + 1] = bytes[pos + i * 3 + 1];
    rgba[i * 4 + 2] = bytes[pos + i * 3 + 2];
    rgba[i * 4 + 3] = 255;
  }
  return { width, height, rgba };
}
