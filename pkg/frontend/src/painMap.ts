import type { PainEntry, PainSeverity } from "./types.js";

export type RegionState = "none" | PainSeverity;

// Clicking a region walks this cycle; the colours mirror it (neutral,
// yellow, red).
export function nextState(state: RegionState): RegionState {
  switch (state) {
    case "none": return "mild";
    case "mild": return "severe";
    case "severe": return "none";
  }
}

interface Zone {
  region: string;
  label: string;
  x: number;
  y: number;
  w: number;
  h: number;
}

// Schematic body layout on a 100x220 canvas; not medical-grade imagery.
const ZONES: Zone[] = [
  { region: "head", label: "Head", x: 35, y: 0, w: 30, h: 28 },
  { region: "chest", label: "Chest", x: 28, y: 32, w: 44, h: 34 },
  { region: "abdomen", label: "Abdomen", x: 28, y: 70, w: 44, h: 28 },
  { region: "pelvis", label: "Pelvis", x: 28, y: 102, w: 44, h: 22 },
  { region: "back", label: "Back", x: 2, y: 52, w: 22, h: 46 },
  { region: "left-arm", label: "L arm", x: 2, y: 32, w: 22, h: 16 },
  { region: "right-arm", label: "R arm", x: 76, y: 32, w: 22, h: 16 },
  { region: "left-leg", label: "L leg", x: 28, y: 128, w: 20, h: 60 },
  { region: "right-leg", label: "R leg", x: 52, y: 128, w: 20, h: 60 },
];

export class PainMap {
  readonly element: SVGSVGElement;
  private readonly state = new Map<string, RegionState>();
  private readonly readOnly: boolean;

  constructor(readOnly = false) {
    this.readOnly = readOnly;
    const ns = "http://www.w3.org/2000/svg";
    this.element = document.createElementNS(ns, "svg") as SVGSVGElement;
    this.element.setAttribute("viewBox", "0 0 100 220");
    this.element.classList.add("pain-map");
    for (const zone of ZONES) {
      this.state.set(zone.region, "none");
      const group = document.createElementNS(ns, "g");
      group.setAttribute("data-region", zone.region);
      const rect = document.createElementNS(ns, "rect");
      rect.setAttribute("x", String(zone.x));
      rect.setAttribute("y", String(zone.y));
      rect.setAttribute("width", String(zone.w));
      rect.setAttribute("height", String(zone.h));
      rect.setAttribute("rx", "4");
      const text = document.createElementNS(ns, "text");
      text.setAttribute("x", String(zone.x + zone.w / 2));
      text.setAttribute("y", String(zone.y + zone.h / 2 + 2));
      text.setAttribute("text-anchor", "middle");
      text.textContent = zone.label;
      group.appendChild(rect);
      group.appendChild(text);
      group.classList.add("zone", "state-none");
      if (!readOnly) {
        group.addEventListener("click", () => this.cycle(zone.region));
      }
      this.element.appendChild(group);
    }
  }

  regionState(region: string): RegionState {
    return this.state.get(region) ?? "none";
  }

  cycle(region: string): void {
    if (this.readOnly || !this.state.has(region)) return;
    this.setRegion(region, nextState(this.regionState(region)));
  }

  setRegion(region: string, state: RegionState): void {
    if (!this.state.has(region)) return;
    this.state.set(region, state);
    const group = this.element.querySelector(`g[data-region="${region}"]`);
    if (group) {
      group.classList.remove("state-none", "state-mild", "state-severe");
      group.classList.add(`state-${state}`);
    }
  }

  /** Entries for the submission body: only regions with pain are sent. */
  entries(): PainEntry[] {
    const out: PainEntry[] = [];
    for (const zone of ZONES) {
      const state = this.regionState(zone.region);
      if (state !== "none") {
        out.push({ region: zone.region, severity: state });
      }
    }
    return out;
  }

  /** Mirror a recorded assessment (for the doctor's read-only view). */
  load(entries: PainEntry[]): void {
    for (const zone of ZONES) this.setRegion(zone.region, "none");
    for (const entry of entries) this.setRegion(entry.region, entry.severity);
  }

  reset(): void {
    this.load([]);
  }
}
