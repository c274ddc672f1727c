"""
Example client: certify a W state over the WebSocket API.

  1. Check server health and query the threshold alpha over HTTP
  2. Send create_job (certify_point) over the WebSocket
  3. Follow job_status / job_progress messages
  4. Download the stored report over HTTP

Usage:
  python server.py            (in one terminal)
  python example_client.py    (in another)
"""

import asyncio
import json
import os
import sys
import uuid

import httpx
import websockets

# ===== Configuration =====

BASE_URL = os.environ.get("DICKE_CERT_URL", "http://127.0.0.1:8004")
WS_URL = BASE_URL.replace("http", "ws", 1) + "/api/ws"

N = 4
K = 1
SHOTS = 16384
SEED = 7
NOISE_P = 0.0          # two-qubit gate depolarizing probability
NOISE_LAMBDA = 0.0     # global depolarizing probability

DOWNLOAD_DIR = "downloaded_reports"


async def main():
    client_id = f"example-client-{uuid.uuid4().hex[:8]}"
    request_id = f"req-{uuid.uuid4().hex[:8]}"

    print("=" * 60)
    print(f"  Certifying |D_{N}^({K})>   shots={SHOTS} seed={SEED}")
    print(f"  Server: {BASE_URL}   client: {client_id}")
    print("=" * 60)

    print("\n[1/4] Checking server...")
    async with httpx.AsyncClient() as http_client:
        try:
            resp = await http_client.get(f"{BASE_URL}/api/health")
            resp.raise_for_status()
            alpha = (await http_client.get(f"{BASE_URL}/api/alpha", params={"n": N, "k": K})).json()
        except Exception as e:
            print(f"  x cannot reach server: {e}")
            sys.exit(1)
        print(f"  ok, alpha = {alpha['alpha']:.6f} ({alpha['method']})")

    print("\n[2/4] Creating certify_point job...")
    result = None
    async with websockets.connect(f"{WS_URL}?client_id={client_id}") as ws:
        await ws.send(json.dumps({
            "type": "create_job",
            "task_type": "certify_point",
            "request_id": request_id,
            "params": {
                "n": N,
                "k": K,
                "shots": SHOTS,
                "seed": SEED,
                "noise_p": NOISE_P,
                "noise_lambda": NOISE_LAMBDA,
            },
        }))

        print("\n[3/4] Waiting for the job...")
        while True:
            msg = json.loads(await ws.recv())
            msg_type = msg.get("type")

            if msg_type == "job_status":
                status = msg.get("status")
                if status == "completed":
                    result = msg.get("result", {})
                    break
                if status in ("failed", "cancelled"):
                    print(f"  [{status}] {msg.get('error_type')}: {msg.get('error')}")
                    sys.exit(1)
                print(f"  [{status}] job {msg.get('job_id', '')[:12]}")

            elif msg_type == "job_progress":
                progress = msg.get("progress", {})
                basis = progress.get("basis") or ""
                print(f"  [progress] {progress.get('stage')} {basis} {progress.get('percent')}%")

            elif msg_type == "error":
                print(f"  [error] {msg.get('message')}")
                sys.exit(1)

    report = result["report"]
    print(f"  energy   = {report['energy']['mean']:.6f} +/- {report['energy']['sem']:.6f}")
    print(f"  f_lower  = {report['f_lower']:.6f}   alpha = {report['alpha']:.6f}")
    print(f"  GME certified: {report['gme_certified']} (conservative: {report['gme_certified_conservative']})")

    filename = result.get("filename")
    if not filename:
        return
    print("\n[4/4] Downloading report...")
    os.makedirs(DOWNLOAD_DIR, exist_ok=True)
    async with httpx.AsyncClient() as http_client:
        resp = await http_client.get(f"{BASE_URL}/api/reports/{filename}")
        resp.raise_for_status()
        local_path = os.path.join(DOWNLOAD_DIR, filename)
        with open(local_path, "wb") as f:
            f.write(resp.content)
    print(f"  saved {local_path}")


if __name__ == "__main__":
    asyncio.run(main())
