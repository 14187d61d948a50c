def main() -> None:
    from zeroday.cli import main as cli_main

    raise SystemExit(cli_main())
