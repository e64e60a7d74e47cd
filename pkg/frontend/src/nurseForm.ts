import { ApiClient, ApiRequestError } from "./api.js";
import { PainMap } from "./painMap.js";
import type { Assessment, PatientCase } from "./types.js";
import { colourBadge, el, selectField, stepper } from "./widgets.js";

const AVPU_OPTIONS: [string, string][] = [
  ["0", "Alert"],
  ["1", "Responds to voice"],
  ["2", "Responds to pain"],
  ["3", "Unresponsive"],
];

const FLAG_OPTIONS = ["pvb", "pregnancy", "trauma-mechanism"];

// Everything except the name is a stepper, picker, checkbox, or map click.
export class NurseForm {
  readonly element: HTMLElement;
  readonly painMap: PainMap;
  private readonly api: ApiClient;
  private pending = false;

  constructor(api: ApiClient) {
    this.api = api;
    this.painMap = new PainMap();
    this.element = el("form", { class: "nurse-form", novalidate: "" });
    this.element.append(
      el("h2", {}, ["Nurse triage"]),
      el("label", { class: "field", "data-field": "name" },
         ["Patient name", el("input", { name: "name", type: "text" })]),
      stepper("age", "Age (years)", 40, 0, 120, 1),
      stepper("sbp", "Systolic BP (mmHg)", 120, 40, 300, 1),
      stepper("hr", "Heart rate (bpm)", 80, 20, 250, 1),
      stepper("temp", "Temperature (°C)", 36.5, 30, 43, 0.1),
      stepper("rr", "Respiration (breaths/min)", 14, 4, 60, 1),
      selectField("avpu", "Consciousness (AVPU)", AVPU_OPTIONS),
      el("fieldset", { class: "flags" },
         [el("legend", {}, ["Flags"]),
          ...FLAG_OPTIONS.map((flag) => el("label", { class: "flag" }, [
            el("input", { type: "checkbox", name: "flag", value: flag }),
            flag,
          ]))]),
      el("div", { class: "pain-panel" },
         [el("h3", {}, ["Pain map (click: none → mild → severe)"]),
          this.painMap.element]),
      el("button", { type: "submit", class: "primary" }, ["Compute triage"]),
      el("div", { class: "result", "aria-live": "polite" }),
    );
    this.element.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.submit();
    });
  }

  private input(name: string): HTMLInputElement {
    return this.element.querySelector(`[name="${name}"]`) as HTMLInputElement;
  }

  private get submitButton(): HTMLButtonElement {
    return this.element.querySelector("button[type=submit]") as HTMLButtonElement;
  }

  private get resultBox(): HTMLElement {
    return this.element.querySelector(".result") as HTMLElement;
  }

  assessmentBody(): Assessment {
    const flags = Array.from(
      this.element.querySelectorAll<HTMLInputElement>("input[name=flag]:checked"),
      (box) => box.value);
    return {
      sbp: Number(this.input("sbp").value),
      hr: Number(this.input("hr").value),
      temp: Number(this.input("temp").value),
      rr: Number(this.input("rr").value),
      avpu: Number((this.element.querySelector("[name=avpu]") as HTMLSelectElement).value),
      pain: this.painMap.entries(),
      flags,
    };
  }

  async submit(): Promise<PatientCase | null> {
    if (this.pending) return null;  // no double submit until the reply lands
    this.pending = true;
    this.submitButton.disabled = true;
    this.clearFieldErrors();
    try {
      const created = await this.api.submitPatient(
        this.input("name").value.trim(),
        Number(this.input("age").value),
        this.assessmentBody());
      this.renderSuccess(created);
      return created;
    } catch (error) {
      if (error instanceof ApiRequestError) {
        this.renderError(error);
        return null;
      }
      throw error;
    } finally {
      this.pending = false;
      this.submitButton.disabled = false;
    }
  }

  private renderSuccess(created: PatientCase): void {
    const box = this.resultBox;
    box.innerHTML = "";
    box.className = "result ok";
    box.append(
      el("div", { class: "banner" }, [
        colourBadge(created.triage.colour, created.triage.crisp_ts),
        ` ${created.name} — queue position ${created.queue_position ?? "-"}`,
      ]),
      el("div", { class: "detail" },
         [`case ${created.id}, expected consult `
          + `${Math.round(created.predicted_consult_min)} min`]),
    );
  }

  private renderError(error: ApiRequestError): void {
    const box = this.resultBox;
    box.innerHTML = "";
    box.className = "result error";
    box.append(el("div", { class: "banner" }, [error.body.message]));
    if (error.body.field) {
      const field = this.element.querySelector(
        `[data-field="${error.body.field}"]`);
      field?.classList.add("invalid");
    }
  }

  private clearFieldErrors(): void {
    for (const field of this.element.querySelectorAll(".invalid")) {
      field.classList.remove("invalid");
    }
  }
}
