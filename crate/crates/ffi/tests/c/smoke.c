#include <math.h>
#include <stdio.h>
#include <string.h>

#include "moproc.h"

#define CHECK(cond)                                                   \
  do {                                                                \
    if (!(cond)) {                                                    \
      const char *e = mp_last_error();                                \
      fprintf(stderr, "line %d: %s (%s)\n", __LINE__, #cond, e ? e : ""); \
      return 1;                                                       \
    }                                                                 \
  } while (0)

int main(void) {
  MpTask *task = NULL;
  CHECK(mp_task_load("HOI-2", &task) == MP_STATUS_OK);
  CHECK(mp_task_set_float(task, "diameter", 0.3) == MP_STATUS_OK);
  CHECK(mp_task_set_float(task, "nope", 1.0) == MP_STATUS_INVALID);
  CHECK(strstr(mp_last_error(), "nope") != NULL);

  MpTask *bad = NULL;
  CHECK(mp_task_compile("task \"b\" { constraint all frames: joint(nose).pos.y > 1; }", &bad) == MP_STATUS_PARSE);
  CHECK(bad == NULL);
  CHECK(strstr(mp_last_error(), "1:41") != NULL);

  MpConfig cfg = mp_config_default();
  cfg.frames = 20;
  cfg.steps = 30;
  cfg.lr = 0.05;
  MpMotion *motion = NULL;
  double err = -1.0;
  CHECK(mp_optimize(task, &cfg, &motion, &err) == MP_STATUS_OK);
  CHECK(err >= 0.0 && isfinite(err));

  size_t frames = 0;
  CHECK(mp_motion_frame_count(motion, &frames) == MP_STATUS_OK);
  CHECK(frames == 20);

  char *json = NULL;
  CHECK(mp_motion_to_json(motion, &json) == MP_STATUS_OK);
  MpMotion *again = NULL;
  CHECK(mp_motion_from_json(json, &again) == MP_STATUS_OK);
  mp_string_free(json);

  double err2 = -1.0;
  CHECK(mp_constraint_error(task, again, &err2) == MP_STATUS_OK);
  CHECK(fabs(err - err2) < 1e-9);

  MpMetrics m;
  CHECK(mp_metrics(again, task, &m) == MP_STATUS_OK);
  CHECK(m.bone_length_incorrect_ratio == 0.0);
  CHECK(m.success == (m.constraint_error <= 0.05));
  CHECK(mp_metrics(again, NULL, &m) == MP_STATUS_OK);
  CHECK(m.success == -1 && isnan(m.constraint_error));

  CHECK(mp_task_load(NULL, &bad) == MP_STATUS_NULL_ARGUMENT);
  CHECK(mp_motion_from_json("{", &again) == MP_STATUS_INVALID);

  mp_motion_free(again);
  mp_motion_free(motion);
  mp_task_free(task);
  mp_task_free(NULL);
  printf("ok %s\n", mp_version());
  return 0;
}
