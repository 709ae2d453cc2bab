import io
import logging

from firefilter.utils.logger_config import setup_logger


def test_package_records_follow_the_requested_level() -> None:
    stream = io.StringIO()
    logger = setup_logger(level=logging.INFO, stream=stream)
    assert logger.name == "firefilter"

    logging.getLogger("firefilter.assimilation.enkf").info("cycle finished")
    logging.getLogger("firefilter.assimilation.enkf").debug("member detail")
    text = stream.getvalue()
    assert " - INFO - cycle finished" in text
    assert "member detail" not in text


def test_other_libraries_only_report_warnings() -> None:
    stream = io.StringIO()
    setup_logger(level=logging.DEBUG, stream=stream)
    logging.getLogger("firefilter.solver.level_set").debug("step taken")
    logging.getLogger("elsewhere").info("chatter")
    logging.getLogger("elsewhere").warning("careful")
    text = stream.getvalue()
    assert " - DEBUG - step taken" in text
    assert "chatter" not in text
    assert " - WARNING - careful" in text
    setup_logger(level=logging.INFO, stream=io.StringIO())
