import logging

from flask import Flask
from flask.logging import default_handler

from .extensions import plotting


def create_app(test_config=None):
    app = Flask(__name__)
    app.config.from_mapping(
        OUT_DIR="out",
        SEED=0,
        TOLERANCE=None,
        JOBS=1,
        SUBSTEP=1e-3,
        INTEGRATOR_ORDER=6,
        LOG_LEVEL="INFO",
        SVG_HASHSALT="nlqm",
    )
    # NLQM_OUT_DIR, NLQM_SEED, ... override the defaults
    app.config.from_prefixed_env("NLQM")
    if test_config is not None:
        app.config.from_mapping(test_config)
    # from_prefixed_env JSON-decodes values, so NLQM_OUT_DIR=2026 arrives as an int
    app.config["OUT_DIR"] = str(app.config["OUT_DIR"])
    app.config["SVG_HASHSALT"] = str(app.config["SVG_HASHSALT"])

    # Library modules log under "nlqm"; route them through Flask's handler
    package_logger = logging.getLogger(__name__)
    if default_handler not in package_logger.handlers:
        package_logger.addHandler(default_handler)
    package_logger.setLevel(app.config["LOG_LEVEL"])

    # Init Extensions
    plotting.init_app(app)

    # Register Blueprints
    from .cli.main import main
    from .cli.orbit import orbit
    from .cli.reduced import reduced
    from .cli.state import state
    from .cli.verify import verify

    app.register_blueprint(main)
    app.register_blueprint(reduced)
    app.register_blueprint(state)
    app.register_blueprint(orbit)
    app.register_blueprint(verify)

    return app
