"""Start the adapter sidecar."""

from __future__ import annotations

import click


@click.command()
@click.option("--port", default=8600, show_default=True, type=int)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--nli-checkpoint", default=None,
              help="Transformers NLI checkpoint id (lexical fallback if unset).")
@click.option("--judge-url", default=None, help="Upstream judge endpoint to proxy.")
def main(port, host, nli_checkpoint, judge_url):
    import uvicorn

    from .nli import build_backend
    from .server import create_app

    app = create_app(nli_backend=build_backend(nli_checkpoint), judge_url=judge_url)
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
