import { ApiClient } from "./api.js";
import { PainMap } from "./painMap.js";
import type { PatientCase } from "./types.js";
import { colourBadge, el, minutes, selectField } from "./widgets.js";

const DOCTORS: [string, string][] = [
  ["dr-a", "Doctor A"],
  ["dr-b", "Doctor B"],
  ["dr-c", "Doctor C"],
];

// The Next Patient button closes the running consultation (submitting the
// typed notes) and loads whoever the re-optimized queue puts first.
export class DoctorPanel {
  readonly element: HTMLElement;
  private readonly api: ApiClient;
  private pending = false;

  constructor(api: ApiClient) {
    this.api = api;
    this.element = el("section", { class: "doctor-panel" });
    this.element.append(
      el("h2", {}, ["Doctor"]),
      selectField("doctor", "Doctor", DOCTORS),
      el("label", { class: "field", "data-field": "notes" },
         ["Notes for the current consultation",
          el("textarea", { name: "notes", rows: "4" })]),
      el("button", { type: "button", class: "primary next" }, ["Next patient"]),
      el("div", { class: "current", "aria-live": "polite" },
         [el("p", { class: "placeholder" }, ["No consultation running."])]),
    );
    this.nextButton.addEventListener("click", () => void this.next());
  }

  private get nextButton(): HTMLButtonElement {
    return this.element.querySelector("button.next") as HTMLButtonElement;
  }

  private get notesField(): HTMLTextAreaElement {
    return this.element.querySelector("[name=notes]") as HTMLTextAreaElement;
  }

  doctorId(): string {
    return (this.element.querySelector("[name=doctor]") as HTMLSelectElement).value;
  }

  async next(): Promise<PatientCase | null> {
    if (this.pending) return null;
    this.pending = true;
    this.nextButton.disabled = true;
    try {
      const response = await this.api.nextPatient(
        this.doctorId(), this.notesField.value);
      this.notesField.value = "";
      this.renderPatient(response.patient);
      return response.patient;
    } finally {
      this.pending = false;
      this.nextButton.disabled = false;
    }
  }

  renderPatient(patient: PatientCase | null): void {
    const box = this.element.querySelector(".current") as HTMLElement;
    box.innerHTML = "";
    if (patient === null) {
      box.append(el("p", { class: "placeholder" }, ["No patients waiting."]));
      return;
    }
    const vitals = patient.assessment;
    const map = new PainMap(true);
    map.load(vitals.pain);
    box.append(
      el("div", { class: "banner" }, [
        colourBadge(patient.triage.colour, patient.triage.crisp_ts),
        ` ${patient.name} (${patient.age} y) — case ${patient.id}`,
      ]),
      el("table", { class: "vitals" }, [
        el("tbody", {}, [
          row("Systolic BP", `${vitals.sbp} mmHg`),
          row("Heart rate", `${vitals.hr} bpm`),
          row("Temperature", `${vitals.temp} °C`),
          row("Respiration", `${vitals.rr} /min`),
          row("AVPU", String(vitals.avpu)),
          row("Flags", vitals.flags.join(", ") || "none"),
          row("Expected consult", minutes(patient.predicted_consult_min)),
        ]),
      ]),
      el("div", { class: "pain-panel readonly" },
         [el("h3", {}, ["Reported pain"]), map.element]),
    );
  }
}

function row(label: string, value: string): HTMLElement {
  return el("tr", {}, [el("th", {}, [label]), el("td", {}, [value])]);
}
