"""Record the chat replay fixture used by the determinism tests.

Runs every search mode over the bundled test split with a chat generator whose
transport is a local stub model, in record mode, writing tests/golden/replay_cache.jsonl.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "tests"))

from stub_model import transport  # noqa: E402

from plansearch.dataset import bundled_fixtures  # noqa: E402
from plansearch.harness import chat_factory, run_experiment  # noqa: E402
from plansearch.llm_client import ChatClient, ClientConfig, ClientMode  # noqa: E402
from plansearch.search import ALGORITHMS, SearchConfig  # noqa: E402

MODEL = "stub-model"


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default=str(ROOT / "tests" / "golden" / "replay_cache.jsonl"))
    args = parser.parse_args()
    out = Path(args.out)
    if out.exists():
        out.unlink()
    split = bundled_fixtures()
    client = ChatClient(
        ClientConfig(model=MODEL, mode=ClientMode.RECORD, cache_path=str(out)),
        transport=transport(split.records),
    )
    configs = [SearchConfig(a) for a in ALGORITHMS]
    run_experiment(split.test, configs, chat_factory(client, split.library), repeats=1, base_seed=0)
    print(f"recorded {len(client.cache)} responses to {out}")


if __name__ == "__main__":
    main()
