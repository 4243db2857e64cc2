#include <nan.h>

NAN_METHOD(Length) {
  v8::Local<v8::String> s = info[0]->ToString();
  info.GetReturnValue().Set(Nan::New(s->Length()));
}

@@@ this is not C ++ ;;; { { } ) ]] #
template <<<< class >>>> broken( {
