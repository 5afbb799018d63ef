import argparse

import uvicorn

from videval_backend.app import create_app
from videval_backend.config import BackendConfig


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="videval-backend", description="Serve the provider wire protocol")
    parser.add_argument("--config", help="YAML config file")
    parser.add_argument("--host")
    parser.add_argument("--port", type=int)
    parser.add_argument("--mode", choices=["stub", "real"])
    parser.add_argument("--seed", type=int, help="stub mode seed")
    args = parser.parse_args(argv)

    config = BackendConfig.from_file(args.config) if args.config else BackendConfig()
    if args.host is not None:
        config.host = args.host
    if args.port is not None:
        config.port = args.port
    if args.mode is not None:
        config = BackendConfig(**{**config.__dict__, "mode": args.mode})
    if args.seed is not None:
        config.stub_seed = args.seed

    uvicorn.run(create_app(config), host=config.host, port=config.port, log_level="info")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
