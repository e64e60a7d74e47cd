import { ApiClient } from "./api.js";
import type { QueueResponse, QueueRow } from "./types.js";
import { colourBadge, el, minutes } from "./widgets.js";

export const POLL_INTERVAL_MS = 10_000;

/** Rows in display order, straight from the API response. */
export function boardRows(response: QueueResponse): QueueRow[] {
  return [...response.rows].sort((a, b) => a.position - b.position);
}

export class QueueBoard {
  readonly element: HTMLElement;
  private readonly api: ApiClient;
  private timer: ReturnType<typeof setInterval> | null = null;

  constructor(api: ApiClient) {
    this.api = api;
    this.element = el("section", { class: "queue-board" });
    this.element.append(
      el("h2", {}, ["Waiting queue"]),
      el("table", {}, [
        el("thead", {}, [el("tr", {}, [
          el("th", {}, ["#"]), el("th", {}, ["Patient"]),
          el("th", {}, ["Colour"]), el("th", {}, ["Waited"]),
          el("th", {}, ["Projected start"]),
        ])]),
        el("tbody", {}, []),
      ]),
      el("p", { class: "empty", hidden: "" }, ["Queue is empty."]),
    );
  }

  async refresh(): Promise<void> {
    this.render(await this.api.getQueue());
  }

  render(response: QueueResponse): void {
    const body = this.element.querySelector("tbody") as HTMLElement;
    const empty = this.element.querySelector(".empty") as HTMLElement;
    body.innerHTML = "";
    const rows = boardRows(response);
    empty.toggleAttribute("hidden", rows.length > 0);
    for (const row of rows) {
      body.append(el("tr", { "data-case": row.id }, [
        el("td", {}, [String(row.position)]),
        el("td", {}, [`${row.name} (${row.id})`]),
        el("td", {}, [colourBadge(row.colour, row.crisp_ts)]),
        el("td", {}, [minutes(row.waited_min)]),
        el("td", {}, [`+${minutes(row.projected_start_min)}`]),
      ]));
    }
  }

  /** Poll the queue endpoint; the board never refreshes slower than 10 s. */
  start(intervalMs: number = POLL_INTERVAL_MS): void {
    this.stop();
    void this.refresh();
    this.timer = setInterval(() => void this.refresh(), intervalMs);
  }

  stop(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }
}
