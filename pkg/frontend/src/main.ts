import "./style.css";
import { createApp } from "./app";

const params = new URLSearchParams(window.location.search);
const caseId = params.get("case") ?? "applicant-000";

const root = document.querySelector<HTMLDivElement>("#app");
if (root) {
  void createApp(root, caseId).load();
}
