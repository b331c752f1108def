# coding: utf-8

# # Driving the loop over HTTP
#
# Everything the library does is also reachable through a small REST
# service, which is how the web frontend (or any other client) runs the
# distill-alter-tune cycle. This walkthrough boots the real server in a
# background thread and speaks plain HTTP to it with the standard library —
# no client SDK involved.

import json
import threading
import time
import urllib.request

import uvicorn

from fairsteer.service import create_app

HOST, PORT = "127.0.0.1", 8844
BASE = f"http://{HOST}:{PORT}"

server = uvicorn.Server(
    uvicorn.Config(create_app(), host=HOST, port=PORT, log_level="warning")
)
threading.Thread(target=server.run, daemon=True).start()
while not server.started:
    time.sleep(0.05)
print(f"service up at {BASE}")


def call(method, path, body=None):
    data = None if body is None else json.dumps(body).encode()
    request = urllib.request.Request(
        BASE + path,
        data=data,
        method=method,
        headers={"Content-Type": "application/json"} if data else {},
    )
    with urllib.request.urlopen(request) as response:
        return json.loads(response.read())


def wait_for_job(job_id):
    while True:
        job = call("GET", f"/jobs/{job_id}")
        if job["status"] in ("done", "failed"):
            return job
        time.sleep(0.1)


# ## Sessions hold state server-side
#
# A session owns one event log, one loop state, and at most one running job
# at a time. Concurrent mutations are rejected with 409 rather than queued,
# so two browser tabs cannot silently corrupt each other's work.

session = call("POST", "/sessions")["session_id"]
print(f"session: {session}")

# ## Simulate (or upload) a log
#
# The same built-in biased process as the library demos. Uploading your own
# XES instead is a POST of the raw document to /sessions/{id}/log.

stats = call("POST", f"/sessions/{session}/simulate", {
    "model": "cancer_screening",
    "num_cases": 600,
    "seed": 42,
})
print(f"simulated {stats['num_traces']} traces, {stats['num_events']} events")
rates = stats["ground_truth_rates"]
print(f"exact P(refuse|female) = {rates['P(refuse screening|gender=female)']:.2f}, "
      f"P(refuse|male) = {rates['P(refuse screening|gender=male)']:.2f}")

# ## Training runs as a job
#
# Long work is asynchronous: the POST returns 202 with a job id, clients
# poll, progress reports epoch and loss as it goes.

job = call("POST", f"/sessions/{session}/train", {
    "window": 3,
    "attributes": ["gender"],
    "hidden_layers": [64, 64],
    "epochs": 30,
    "seed": 0,
    "probes": [{

        "attribute": "gender",
        "groups": ["female", "male"],
        "target_class": "refuse screening",
    }],
})
job = wait_for_job(job["job_id"])
print(f"train job: {job['status']}, final loss {job['progress']['loss']:.4f}")

# ## Inspect what was learned

tree = call("GET", f"/sessions/{session}/tree")
print(f"tree: {len(tree['nodes'])} nodes, depth params {tree['params']['max_depth']}")

metrics = call("GET", f"/sessions/{session}/metrics")
latest = metrics["history"][-1]
parity = latest["parity"][0]
print(f"iteration {metrics['iteration']}: accuracy {latest['accuracy']:.3f}, "
      f"fidelity {latest['fidelity']:.3f}, parity gap {parity['gap']:.3f}")

# Any node's routed samples are a click away in the UI; here, the raw call.
# Find a leaf that predicts the refusal and peek at who lands in it.

refuse_index = tree["class_names"].index("refuse screening")
refusal_leaves = [
    node for node in tree["nodes"]
    if node["kind"] == "leaf" and node["predicted"] == refuse_index
]
leaf = max(refusal_leaves, key=lambda node: node["n"])
samples = call(
    "GET", f"/sessions/{session}/tree/node/{leaf['id']}/samples?limit=3"
)
print(f"leaf [{leaf['id']}] holds {samples['count']} prefixes, e.g.:")
for sample in samples["samples"]:
    print(f"  case {sample['case_id']}, prefix length {sample['prefix_length']}")

# ## Edit and iterate
#
# Edits travel as the same JSON the CLI and the frontend use. The iterate
# job applies them, relabels, fine-tunes, and re-distills.

parent = next(
    node for node in tree["nodes"]
    if node["kind"] == "internal"
    and leaf["id"] in (node["left"], node["right"])
)
print(f"\nremoving [{parent['id']}] ({parent['display']}) above the leaf")
job = call("POST", f"/sessions/{session}/iterate", {
    "edits": [{"type": "remove", "node_id": parent["id"]}],
    "epochs": 10,
})
job = wait_for_job(job["job_id"])
print(f"iterate job: {job['status']}, relabeled "
      f"{job['progress']['relabeled']}/{job['progress']['total']} prefixes")

metrics = call("GET", f"/sessions/{session}/metrics")
for i, entry in enumerate(metrics["history"]):
    gap = entry["parity"][0]["gap"]
    print(f"iteration {i}: accuracy {entry['accuracy']:.3f}, gap {gap:.3f}")

# ## Export
#
# The export document bundles model checkpoint, canonical tree, edit log,
# and metrics history — everything needed to archive or resume the session.

export = call("GET", f"/sessions/{session}/export")
print(f"\nexport keys: {sorted(export)}")
print(f"edit log: {export['edit_log']}")

server.should_exit = True
