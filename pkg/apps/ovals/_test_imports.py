import ovals.aniso_flow
import ovals.asymptotics
import ovals.classes
import ovals.cli
import ovals.config
import ovals.data
import ovals.entropy
import ovals.experiments
import ovals.helpers
import ovals.models
import ovals.monitors
import ovals.radial_flow
import ovals.runner
import ovals.solitons
import ovals.spectral
