/**
 * Headless scripted session against a running segmentation server:
 * connect, load an image, place the seed, drag it briefly, add one helper,
 * judge satisfied, and write the exported session log.
 *
 * Usage:
 *   raycut serve --transport tcp --port 0   # default flags; note the port
 *   node dist/demo.js <host> <port> <image.pgm> <seedX> <seedY> [log.jsonl]
 *
 * The exported log embeds this client's params, so the server must run
 * with matching flags (here: the defaults) for replays to reproduce the
 * live contours.
 */

import { appendFileSync } from "node:fs";

import { DEFAULT_PARAMS } from "./protocol.js";
import { InteractionController } from "./controller.js";
import { TcpTransport } from "./tcp.js";

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

async function main(): Promise<number> {
  const [host, portText, image, sxText, syText, logPath] = process.argv.slice(2);
  if (!host || !portText || !image || !sxText || !syText) {
    console.error("usage: demo <host> <port> <image> <seedX> <seedY> [log.jsonl]");
    return 2;
  }
  const seedX = Number(sxText);
  const seedY = Number(syText);

  const controller = new InteractionController({
    params: DEFAULT_PARAMS,
    logSink: (json) => {
      if (logPath) appendFileSync(logPath, json + "\n");
      console.log("session log:", json.slice(0, 120) + "...");
    },
  });
  controller.attach(await TcpTransport.connect(host, Number(portText)));

  controller.loadImage(image);
  await sleep(200);
  controller.pointerDown("primary", seedX, seedY);
  for (let k = 1; k <= 30; k++) {
    controller.pointerMove(seedX + Math.sin(k / 5) * 4, seedY + Math.cos(k / 5) * 3);
    await sleep(16); // ~60 Hz pointer
  }
  controller.pointerUp();
  await sleep(200);
  controller.pointerDown("secondary", seedX, seedY + 30);
  await sleep(200);
  controller.keyPress("satisfied_yes");
  await sleep(300);

  const view = controller.view;
  console.log(
    `lesion ${view.lesionId}: finalized=${view.finalized} ` +
      `drags sent=${controller.dragMessagesSent} contour updates=${controller.contourUpdates} ` +
      `diameter_a=${view.contour?.diameter_a_px.toFixed(1)} px`,
  );
  return view.finalized ? 0 : 1;
}

main().then(
  (code) => process.exit(code),
  (err) => {
    console.error(err);
    process.exit(1);
  },
);
