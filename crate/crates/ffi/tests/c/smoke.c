#include <stdio.h>
#include <string.h>

#include "ydof.h"

#define CHECK(cond)                                              \
  do {                                                           \
    if (!(cond)) {                                               \
      fprintf(stderr, "%s:%d: %s\n", __FILE__, __LINE__, #cond); \
      return 1;                                                  \
    }                                                            \
  } while (0)

int main(void) {
  YdofRegion *region = NULL;
  CHECK(ydof_region_new(3, 2, 2, 4, &region) == YDOF_STATUS_OK);

  size_t count = 0;
  CHECK(ydof_region_vertex_count(region, &count) == YDOF_STATUS_OK);
  CHECK(count > 0);

  int64_t num[6] = {2, 0, 0, 2, 2, 0};
  int64_t den[6] = {1, 1, 1, 1, 1, 1};
  bool inside = false;
  CHECK(ydof_region_contains(region, num, den, &inside) == YDOF_STATUS_OK);
  CHECK(inside);

  YdofPlan *plan = NULL;
  CHECK(ydof_plan_new(region, num, den, &plan) == YDOF_STATUS_OK);
  YdofPlanInfo info;
  CHECK(ydof_plan_info(plan, &info) == YDOF_STATUS_OK);
  CHECK(info.case_label == 1 && info.t == 1 && info.total_streams == 6);

  YdofMonteCarlo mc;
  CHECK(ydof_monte_carlo_noiseless(plan, 4, 0, &mc) == YDOF_STATUS_OK);
  CHECK(mc.successes == 4 && mc.max_error < 1e-8);

  char *json = NULL;
  CHECK(ydof_plan_to_json(plan, &json) == YDOF_STATUS_OK);
  CHECK(strstr(json, "\"blocks\"") != NULL);
  ydof_string_free(json);

  int64_t bad[6] = {3, 0, 0, 0, 0, 0};
  YdofPlan *none = NULL;
  CHECK(ydof_plan_new(region, bad, den, &none) == YDOF_STATUS_NOT_IN_REGION);
  CHECK(none == NULL);
  CHECK(strstr(ydof_last_error(), "violates") != NULL);

  ydof_plan_free(plan);
  ydof_region_free(region);
  printf("ok %s\n", ydof_version());
  return 0;
}
