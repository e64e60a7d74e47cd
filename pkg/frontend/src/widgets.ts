import type { Colour } from "./types.js";

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  children: (Node | string)[] = [],
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, value);
  }
  for (const child of children) {
    node.append(child);
  }
  return node;
}

export function colourBadge(colour: Colour, ts?: number): HTMLElement {
  const label = ts === undefined ? colour : `${colour} · TS ${ts.toFixed(2)}`;
  return el("span", { class: `badge badge-${colour}` }, [label]);
}

/** Numeric stepper: spinner input plus +/- buttons, no free typing needed.
 * The buttons sit outside the label so label click-forwarding cannot
 * re-target a click onto the first button. */
export function stepper(name: string, label: string, value: number,
                        min: number, max: number, step: number): HTMLElement {
  const input = el("input", {
    type: "number", name, id: `field-${name}`, value: String(value),
    min: String(min), max: String(max), step: String(step),
  });
  const dec = el("button", { type: "button", class: "step" }, ["−"]);
  const inc = el("button", { type: "button", class: "step" }, ["+"]);
  const bump = (direction: number) => {
    const current = Number(input.value) || 0;
    const next = Math.min(max, Math.max(min, current + direction * step));
    input.value = String(Number(next.toFixed(4)));
    input.dispatchEvent(new Event("change", { bubbles: true }));
  };
  dec.addEventListener("click", () => bump(-1));
  inc.addEventListener("click", () => bump(1));
  return el("div", { class: "field", "data-field": name },
            [el("label", { for: `field-${name}` }, [label]),
             el("div", { class: "stepper" }, [dec, input, inc])]);
}

export function selectField(name: string, label: string,
                            options: [string, string][]): HTMLElement {
  const select = el("select", { name });
  for (const [value, text] of options) {
    select.append(el("option", { value }, [text]));
  }
  return el("label", { class: "field", "data-field": name }, [label, select]);
}

export function minutes(value: number): string {
  return `${Math.round(value)} min`;
}
