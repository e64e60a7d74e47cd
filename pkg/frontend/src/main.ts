import { ApiClient } from "./api.js";
import { DoctorPanel } from "./doctorForm.js";
import { NurseForm } from "./nurseForm.js";
import { QueueBoard } from "./queueBoard.js";

const api = new ApiClient("");

const nurse = new NurseForm(api);
const doctor = new DoctorPanel(api);
const board = new QueueBoard(api);

const root = document.getElementById("app");
if (!root) throw new Error("missing #app container");

root.append(nurse.element, doctor.element, board.element);
board.start();

// a fresh submission or takeover should show up on the board immediately
nurse.element.addEventListener("submit", () => {
  setTimeout(() => void board.refresh(), 250);
});
doctor.element.querySelector("button.next")?.addEventListener("click", () => {
  setTimeout(() => void board.refresh(), 250);
});
