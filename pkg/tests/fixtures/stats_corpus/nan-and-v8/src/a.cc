#include <nan.h>

NAN_METHOD(F) {
  info.GetReturnValue().Set(info[0]);
}

NAN_MODULE_INIT(Init) {
  Nan::SetMethod(target, "f", F);
  Nan::SetMethod(target, "g", F);
}
