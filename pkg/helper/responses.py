import json

import click


def _emit(payload: dict, err: bool = False) -> None:
    click.echo(json.dumps(payload, indent=2, default=float), err=err)


def ok(message: str, data: dict | None = None) -> int:
    payload = {"success": True, "message": message}
    if data is not None:
        payload["data"] = data
    _emit(payload)
    return 0


def fail(message: str, errors: dict | None = None, exit_code: int = 2) -> int:
    payload = {"success": False, "message": message}
    if errors is not None:
        payload["errors"] = errors
    _emit(payload, err=True)
    return exit_code
