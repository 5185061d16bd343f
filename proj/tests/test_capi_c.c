#include <sirec/sirec.h>
#include <string.h>

/* The public header must compile as plain C and the library must link. */
int main(void) {
  if (sirec_version() == 0) return 1;
  if (strcmp(sirec_last_error(), "") != 0) return 1;
  return 0;
}
