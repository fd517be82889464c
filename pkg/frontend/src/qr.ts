/**
 * QR rendering helpers. The payload is also always shown as base64
 * text; the QR image is a convenience for the officer's scanner.
 */

import { create as createQr } from "qrcode";

export interface QrImage {
  width: number; // pixels, including the quiet zone
  pixels: Uint8ClampedArray<ArrayBuffer>; // RGBA
}

/** Rasterize the payload's QR matrix to RGBA (scale px per module, 4-module quiet zone). */
export function qrToImage(text: string, scale = 4): QrImage {
  const modules = createQr(text).modules;
  const size = modules.size;
  const quiet = 4;
  const width = (size + 2 * quiet) * scale;
  const pixels = new Uint8ClampedArray(new ArrayBuffer(width * width * 4)).fill(255);
  for (let row = 0; row < size; row++) {
    for (let col = 0; col < size; col++) {
      if (!modules.get(row, col)) continue;
      for (let dy = 0; dy < scale; dy++) {
        for (let dx = 0; dx < scale; dx++) {
          const x = (col + quiet) * scale + dx;
          const y = (row + quiet) * scale + dy;
          const offset = (y * width + x) * 4;
          pixels[offset] = pixels[offset + 1] = pixels[offset + 2] = 0;
        }
      }
    }
  }
  return { width, pixels };
}

/** Paint a QR image onto a canvas element. */
export function drawQr(canvas: HTMLCanvasElement, text: string, scale = 4): void {
  const image = qrToImage(text, scale);
  canvas.width = canvas.height = image.width;
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  ctx.putImageData(new ImageData(image.pixels, image.width, image.width), 0, 0);
}
