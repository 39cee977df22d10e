"""Problem instances: linear blending, sensor selection, sparse Cox regression, synthetic streams."""

from .blending import (
    BlendingInstance, blending_grad, blending_loss, blending_problem, blending_stream,
    least_squares, make_blending_instance, rmse,
)
from .cox import (
    CoxDataset, cox_grad, cox_loss, cox_problem, cox_stream, gene_selection, load_cox_csv,
    make_cox_dataset, partial_likelihood, write_cox_csv,
)
from .sensors import (
    SensorFieldInstance, ValidationDraw, initial_point, logdet_grad, logdet_loss,
    make_sensor_instance, make_validation_draws, round_selection, sensor_mse, sensor_problem,
)
from .synthetic import (
    CenterStream, LinearStream, center_problem, linear_problem, make_center_stream,
    make_linear_stream, random_constraints,
)
