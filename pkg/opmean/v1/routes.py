import typer


from opmean.v1.bench.controller import router as bench_router

routes = typer.Typer(no_args_is_help=True, add_completion=False)


routes.add_typer(bench_router)
