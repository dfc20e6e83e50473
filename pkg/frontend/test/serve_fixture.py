"""Launch the model service on a fixture model for the end-to-end tests."""

import sys
from pathlib import Path

import uvicorn

from dddkit.server import create_app

if __name__ == "__main__":
    model_path = Path(sys.argv[1])
    port = int(sys.argv[2])
    uvicorn.run(create_app(model_path), host="127.0.0.1", port=port, log_level="warning")
