import matplotlib


class Plotting:
    """Pins the matplotlib settings that make SVG output byte-stable."""

    def __init__(self, app=None):
        if app is not None:
            self.init_app(app)

    def init_app(self, app):
        matplotlib.use("Agg")
        matplotlib.rcParams.update(
            {
                "svg.hashsalt": app.config["SVG_HASHSALT"],
                "svg.fonttype": "none",
                "path.simplify": False,
            }
        )
        app.extensions["nlqm-plotting"] = self


plotting = Plotting()
