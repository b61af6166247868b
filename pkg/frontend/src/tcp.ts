/** Node TCP transport for the protocol client. */

import * as net from "node:net";

import type { Transport } from "./protocol.js";

export class TcpTransport implements Transport {
  private lineHandlers: Array<(line: string) => void> = [];
  private closeHandlers: Array<(err?: Error) => void> = [];
  private pending = "";

  private constructor(private socket: net.Socket) {
    socket.setEncoding("utf-8");
    socket.on("data", (chunk: string) => {
      this.pending += chunk;
      let idx: number;
      while ((idx = this.pending.indexOf("\n")) >= 0) {
        const line = this.pending.slice(0, idx);
        this.pending = this.pending.slice(idx + 1);
        for (const h of this.lineHandlers) h(line);
      }
    });
    socket.on("error", (err) => {
      for (const h of this.closeHandlers) h(err);
    });
    socket.on("close", () => {
      for (const h of this.closeHandlers) h();
    });
  }

  static connect(host: string, port: number, timeoutMs = 10_000): Promise<TcpTransport> {
    return new Promise((resolve, reject) => {
      const socket = net.createConnection({ host, port });
      const timer = setTimeout(() => {
        socket.destroy();
        reject(new Error(`connect timeout to ${host}:${port}`));
      }, timeoutMs);
      socket.once("connect", () => {
        clearTimeout(timer);
        resolve(new TcpTransport(socket));
      });
      socket.once("error", (err) => {
        clearTimeout(timer);
        reject(err);
      });
    });
  }

  send(line: string): void {
    this.socket.write(line);
  }

  onLine(cb: (line: string) => void): void {
    this.lineHandlers.push(cb);
  }

  onClose(cb: (err?: Error) => void): void {
    this.closeHandlers.push(cb);
  }

  close(): void {
    this.socket.end();
  }
}
