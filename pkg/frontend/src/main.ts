import { mountApp } from "./app";
import "./styles.css";

const root = document.getElementById("app");
if (root === null) throw new Error("missing #app element");
mountApp(root);
